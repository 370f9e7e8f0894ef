//! A reduced mechanism comparison: fewer seeds and points than the full
//! sweep, written as CSV to stdout with mean reputations on stderr.
//!
//! Run with `cargo run --release --example sweep_benchmark > report.csv`.

use care::harness::{run_experiment, summarize, GeneratorParams, MechanismKind, Sweep, SweepAxis};
use care::model::Money;

fn main() {
    let params = GeneratorParams {
        n_workers: 60,
        ..GeneratorParams::default()
    };
    let sweep = Sweep {
        axis: SweepAxis::Requesters,
        points: vec![2, 6, 10],
    };
    let seeds: Vec<u64> = (0..3).collect();
    let report = run_experiment(&sweep, &params, &seeds, &MechanismKind::ALL);
    report.write_csv(std::io::stdout()).expect("stdout");
    for f in &report.failures {
        eprintln!("failure: {:?}", f);
    }
    for s in summarize(&report) {
        let mean = Money::from_rational(s.mean_reputation.clone())
            .map(|m| m.to_f64())
            .unwrap_or(f64::NAN);
        eprintln!("requesters={:>2} {:>10} {:>8.3}", s.value, s.mechanism.label(), mean);
    }
}
