//! Seeded property checks, as `care verify` runs them, for every property.
//!
//! Run with `cargo run --release --example verify_properties [TRIALS]`.

use care::harness::{verify, Property};

fn main() {
    let trials: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(25);
    for p in Property::ALL {
        let r = verify(p, trials, 0);
        println!(
            "{:<9} checked {:>4}  skipped {:>3}  counterexamples {:>3}",
            p.label(),
            r.checked,
            r.skipped,
            r.counterexamples.len()
        );
        if let Some(c) = r.counterexamples.first() {
            println!(
                "  trial {}: {}",
                c.trial,
                c.details.first().map(String::as_str).unwrap_or("")
            );
        }
    }
}
