//! Cooperative mechanism on a three-worker market with one requester.
//!
//! Run with `cargo run --example care_co_worked`.

use care::care_co::analyze_care_co;
use care::model::{rational_to_string, InstanceBuilder};

fn main() {
    // ratios b/v = 1, 2, 6; the requester takes at most two workers
    let inst = InstanceBuilder::new()
        .worker(1, "1", "1")
        .worker(1, "2", "1")
        .worker(1, "6", "1")
        .requester("10")
        .tau(vec![vec![2]])
        .build()
        .expect("valid instance");

    let run = analyze_care_co(&inst);
    println!("cost-effectiveness order: {:?}", run.order.as_slice());
    for (i, v) in run.prefix_values.iter().enumerate() {
        println!("  M(S_{}) = {}", i + 1, rational_to_string(v));
    }
    println!("key worker position: {}", run.key);
    if let Some(u) = &run.unit_price {
        println!("price per unit reputation: {}", rational_to_string(u));
    }
    for (w, p) in &run.outcome.payments {
        println!("worker {} -> requester {} paid {}", w, p.requester, p.amount);
    }
    println!(
        "total paid {} of budget {}",
        run.outcome.total_paid(),
        inst.total_budget()
    );
}
