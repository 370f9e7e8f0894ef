//! Unilateral deviation probe: for each worker, every bid where the outcome
//! can change is tried and the best utility compared with bidding the true
//! cost.
//!
//! Run with `cargo run --example truthfulness_probe`.

use care::model::{rational_to_string, Instance, InstanceBuilder};
use care::oracle::{truthfulness_probe, CareCoMechanism, GridSpec, Mechanism, PeaMechanism};

fn report(inst: &Instance, mechanism: &dyn Mechanism) {
    for w in inst.workers() {
        let r = truthfulness_probe(inst, mechanism, w.id, &GridSpec::default());
        let verdict = match &r.best_bid {
            Some(b) => format!("gains {} by bidding {}", rational_to_string(&r.gain), b),
            None => "no profitable deviation".to_string(),
        };
        println!(
            "  {} worker {} (cost {}): {} [{} bids tried]",
            r.mechanism,
            w.id,
            w.true_cost(),
            verdict,
            r.grid_size
        );
    }
}

fn main() {
    let market = InstanceBuilder::new()
        .worker(1, "1", "1")
        .worker(1, "2", "1")
        .worker(1, "6", "1")
        .requester("10")
        .tau(vec![vec![2]])
        .build()
        .expect("valid instance");
    println!("pooled budget:");
    report(&market, &CareCoMechanism);

    // three groups, three requesters with uneven budgets; raising a bid to
    // 9.25 lifts the critical price from 9 to 9.5 without losing the slot
    let uneven = InstanceBuilder::new()
        .worker(1, "5.5", "1")
        .worker(2, "3", "1")
        .worker(3, "3", "1")
        .requester("5")
        .requester("19")
        .requester("9")
        .tau(vec![vec![1, 0, 1], vec![0, 1, 0], vec![1, 1, 0]])
        .build()
        .expect("valid instance");
    println!("per-requester budgets:");
    report(&uneven, &PeaMechanism);
}
