//! Price-based allocation on one bucket: the per-price table, the critical
//! price, and the counterfactual payment sets.
//!
//! Run with `cargo run --example pea_trace`.

use care::model::InstanceBuilder;
use care::pea::{analyze_pea, PaymentCandidate};

fn main() {
    // bids 1, 1, 3 in one group; each requester accepts one worker of it
    let inst = InstanceBuilder::new()
        .worker(1, "1", "1")
        .worker(1, "1", "1")
        .worker(1, "3", "1")
        .requester("4")
        .requester("4")
        .tau(vec![vec![1, 1]])
        .build()
        .expect("valid instance");

    let all: Vec<usize> = (0..inst.n()).collect();
    let run = analyze_pea(&inst, &all, true);
    println!("{:>8} {:>4} {:>4}", "r", "E", "M_f");
    for rec in &run.trace.records {
        println!(
            "{:>8} {:>4} {:>4}",
            rec.price.to_string(),
            rec.employability,
            rec.max_selected
        );
    }
    match &run.trace.critical_price {
        Some(r) => println!("critical price r* = {}", r),
        None => println!("no critical price"),
    }
    for (w, set) in &run.trace.candidate_sets {
        let shown: Vec<String> = set
            .iter()
            .map(|c| match c {
                PaymentCandidate::Bid(b) => b.to_string(),
                PaymentCandidate::Unbounded => "inf".into(),
            })
            .collect();
        println!("P_{} = {{{}}}", w, shown.join(", "));
    }
    for (w, p) in &run.outcome.payments {
        println!("worker {} -> requester {} paid {}", w, p.requester, p.amount);
    }
}
