//! The assignment network behind the solvers: maximum cardinality under
//! requester caps, maximum reputation, and the Graphviz dump.
//!
//! Run with `cargo run --example flow_network > net.dot`; summaries go to
//! stderr.

use care::flow::{build_assignment_network, max_cardinality, max_reputation, max_reputation_min_cost};
use care::model::{rational_to_string, InstanceBuilder};

fn main() {
    let inst = InstanceBuilder::new()
        .worker(1, "1", "3")
        .worker(1, "1", "5")
        .worker(2, "2", "2")
        .worker(2, "2", "7")
        .requester("5")
        .requester("5")
        .tau(vec![vec![1, 1], vec![0, 1]])
        .build()
        .expect("valid instance");
    let all: Vec<usize> = (0..inst.n()).collect();

    // one slot per requester
    let net = build_assignment_network(&inst, &all, &[1, 1]);
    let card = max_cardinality(&net);
    eprintln!("max cardinality with caps (1,1): {}", card.flow_value);

    let best = max_reputation(&inst, &all);
    let check = max_reputation_min_cost(&inst, &all);
    eprintln!(
        "max reputation: {} (min-cost route: {})",
        rational_to_string(&best.objective),
        rational_to_string(&check.objective)
    );
    for (w, r) in best.assignment.iter() {
        eprintln!("  worker {} -> requester {}", w, r);
    }
    print!("{}", net.to_dot());
}
