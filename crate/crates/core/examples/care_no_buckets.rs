//! Non-cooperative mechanism: reputation buckets, one sampled run, and the
//! exact expectation over buckets.
//!
//! Run with `cargo run --example care_no_buckets`.

use care::care_no::{partition_buckets, run_care_no, CareNoOutput, NoMode};
use care::model::{rational_to_string, InstanceBuilder};

fn main() {
    // ε = 10: reputations 1..10 share a bucket, 11..100 form the next
    let inst = InstanceBuilder::new()
        .worker(1, "2", "1")
        .worker(1, "1", "4")
        .worker(2, "3", "9")
        .worker(2, "2", "40")
        .worker(1, "5", "80")
        .requester("6")
        .requester("9")
        .tau(vec![vec![2, 1], vec![1, 2]])
        .epsilon("10")
        .build()
        .expect("valid instance");

    let partition = partition_buckets(&inst);
    println!("gamma = {}", partition.gamma);
    for (h, members) in partition.buckets.iter().enumerate() {
        let ids: Vec<String> = members.iter().map(|&i| inst.worker(i).id.to_string()).collect();
        println!("  D_{} = {{{}}}", h + 1, ids.join(", "));
    }

    if let CareNoOutput::Sampled { bucket, outcome, .. } = run_care_no(&inst, NoMode::Sampled { seed: 7 }) {
        let ids: Vec<String> = outcome.winners().iter().map(|w| w.to_string()).collect();
        println!("seed 7 realises bucket {}: winners {{{}}}", bucket, ids.join(", "));
    }
    if let CareNoOutput::Expectation(d) = run_care_no(&inst, NoMode::Expectation) {
        for (h, o) in d.per_bucket.iter().enumerate() {
            println!(
                "  bucket {}: reputation {}, spend {:?}",
                h + 1,
                rational_to_string(&o.total_reputation),
                o.diagnostics
                    .requester_spend
                    .values()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
            );
        }
        println!("expected reputation = {}", rational_to_string(&d.expected_reputation));
    }
}
