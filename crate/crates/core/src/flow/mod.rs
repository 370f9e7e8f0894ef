//! Flow formulations of the assignment integer programs.
//!
//! Every program in the mechanisms (maximum reputation, maximum cardinality
//! under per-requester caps, minimum `Σ 2^i` at fixed cardinality) is an
//! assignment over the four-layer network
//!
//! ```text
//! source ─1─▶ worker ─1─▶ slot(l, j) ─τ_lj─▶ requester j ─cap_j─▶ sink
//! ```
//!
//! where a worker of group `l` connects to `slot(l, j)` for every requester.
//! [`FlowNetwork`] materialises this graph (for max-flow, min-cost flow and
//! DOT output); the hot paths use the group-aggregated [`GroupFlow`].

mod group;
mod residual;

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub use group::GroupFlow;
use residual::Residual;

use crate::model::{Assignment, GroupId, Instance, Rational, RequesterId, WorkerId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("cardinality {requested} exceeds the maximum feasible {maximum}")]
    InfeasibleCardinality { requested: u64, maximum: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Source,
    Sink,
    Worker(WorkerId),
    Slot { group: GroupId, requester: RequesterId },
    Requester(RequesterId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: u64,
    pub cost: BigInt,
    pub worker: Option<WorkerId>,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    nodes: Vec<NodeKind>,
    arcs: Vec<FlowArc>,
}

/// Result of a solve. `objective` is the flow value for cardinality
/// problems, `Σ v_i` for reputation, and `Σ 2^position` for minimum weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    pub flow_value: u64,
    pub assignment: Assignment,
    pub objective: Rational,
}

pub const SOURCE: usize = 0;

impl FlowNetwork {
    pub fn nodes(&self) -> &[NodeKind] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    pub fn sink(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Sets the cost of each worker arc (`source → worker`).
    pub fn set_worker_costs(&mut self, mut cost: impl FnMut(WorkerId) -> BigInt) {
        for arc in &mut self.arcs {
            if let Some(w) = arc.worker {
                arc.cost = cost(w);
            }
        }
    }

    fn residual(&self) -> (Residual, Vec<usize>) {
        let mut r = Residual::new(self.nodes.len());
        let ids = self
            .arcs
            .iter()
            .map(|a| r.add_arc(a.from, a.to, a.capacity, a.cost.clone()))
            .collect();
        r.finish();
        (r, ids)
    }

    /// Reads the assignment off saturated `worker → slot` arcs.
    fn decode(&self, residual: &Residual, ids: &[usize]) -> Assignment {
        let mut out = Assignment::new();
        for (arc, &rid) in self.arcs.iter().zip(ids) {
            if residual.flow(rid) <= 0 {
                continue;
            }
            if let (NodeKind::Worker(w), NodeKind::Slot { requester, .. }) = (self.nodes[arc.from], self.nodes[arc.to])
            {
                out.assign(w, requester);
            }
        }
        out
    }

    /// Graphviz rendering; node and arc order are stable across runs.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph assignment {\n  rankdir=LR;\n");
        for (k, node) in self.nodes.iter().enumerate() {
            let label = match node {
                NodeKind::Source => "source".to_string(),
                NodeKind::Sink => "sink".to_string(),
                NodeKind::Worker(w) => format!("s{}", w),
                NodeKind::Slot { group, requester } => format!("G{}·a{}", group, requester),
                NodeKind::Requester(r) => format!("a{}", r),
            };
            let _ = writeln!(s, "  n{} [label=\"{}\"];", k, label);
        }
        for arc in &self.arcs {
            let _ = if arc.cost.is_zero() {
                writeln!(s, "  n{} -> n{} [label=\"{}\"];", arc.from, arc.to, arc.capacity)
            } else {
                writeln!(
                    s,
                    "  n{} -> n{} [label=\"{} / {}\"];",
                    arc.from, arc.to, arc.capacity, arc.cost
                )
            };
        }
        s.push_str("}\n");
        s
    }
}

/// Builds the assignment network for `workers` (instance indices, in the
/// order given) with per-requester caps.
pub fn build_assignment_network(inst: &Instance, workers: &[usize], requester_caps: &[u64]) -> FlowNetwork {
    let m = inst.m();
    let groups = inst.num_groups();
    assert_eq!(requester_caps.len(), m, "one cap per requester");
    let mut nodes = vec![NodeKind::Source];
    nodes.extend(workers.iter().map(|&w| NodeKind::Worker(inst.worker(w).id)));
    let slot_base = nodes.len();
    for l in 0..groups {
        for j in 0..m {
            nodes.push(NodeKind::Slot {
                group: GroupId::from_index(l),
                requester: RequesterId::from_index(j),
            });
        }
    }
    let req_base = nodes.len();
    nodes.extend((0..m).map(|j| NodeKind::Requester(RequesterId::from_index(j))));
    nodes.push(NodeKind::Sink);
    let sink = nodes.len() - 1;

    let mut arcs = Vec::new();
    for (k, &w) in workers.iter().enumerate() {
        arcs.push(FlowArc {
            from: SOURCE,
            to: 1 + k,
            capacity: 1,
            cost: BigInt::zero(),
            worker: Some(inst.worker(w).id),
        });
    }
    for (k, &w) in workers.iter().enumerate() {
        let l = inst.worker(w).group.index();
        for j in 0..m {
            arcs.push(FlowArc {
                from: 1 + k,
                to: slot_base + l * m + j,
                capacity: 1,
                cost: BigInt::zero(),
                worker: None,
            });
        }
    }
    for l in 0..groups {
        for j in 0..m {
            arcs.push(FlowArc {
                from: slot_base + l * m + j,
                to: req_base + j,
                capacity: inst.tau().get(l, j),
                cost: BigInt::zero(),
                worker: None,
            });
        }
    }
    for (j, &cap) in requester_caps.iter().enumerate() {
        arcs.push(FlowArc {
            from: req_base + j,
            to: sink,
            capacity: cap,
            cost: BigInt::zero(),
            worker: None,
        });
    }
    FlowNetwork { nodes, arcs }
}

/// Maximum number of simultaneously assignable workers. Augmenting paths are
/// found by depth-first search in ascending node order.
pub fn max_cardinality(net: &FlowNetwork) -> FlowResult {
    let (mut residual, ids) = net.residual();
    let value = residual.max_flow(SOURCE, net.sink());
    let assignment = net.decode(&residual, &ids);
    debug_assert_eq!(assignment.len() as u64, value);
    FlowResult {
        flow_value: value,
        assignment,
        objective: BigRational::from_integer(BigInt::from(value)),
    }
}

/// Min-cost flow on the network's arc costs, optionally limited to `limit`
/// units. Returns the result and the exact total cost.
pub fn min_cost_flow(net: &FlowNetwork, limit: Option<u64>) -> (FlowResult, BigInt) {
    let (mut residual, ids) = net.residual();
    let (value, cost) = residual.min_cost_flow(SOURCE, net.sink(), limit);
    let assignment = net.decode(&residual, &ids);
    (
        FlowResult {
            flow_value: value,
            assignment,
            objective: BigRational::from_integer(cost.clone()),
        },
        cost,
    )
}

/// Caps that never bind: every requester may take all workers.
pub fn unbounded_caps(inst: &Instance) -> Vec<u64> {
    vec![inst.n() as u64; inst.m()]
}

/// Distributes each group's routed units over its selected workers, lowest
/// requester first, in the order the workers were selected.
fn decode_groups(inst: &Instance, flow: &GroupFlow, selected: &[usize]) -> Assignment {
    let m = inst.m();
    let mut remaining: Vec<Vec<u64>> = (0..inst.num_groups())
        .map(|g| (0..m).map(|j| flow.flow_between(g, j)).collect())
        .collect();
    let mut out = Assignment::new();
    for &w in selected {
        let worker = inst.worker(w);
        let g = worker.group.index();
        let j = remaining[g]
            .iter()
            .position(|&c| c > 0)
            .expect("every selected worker has a routed unit");
        remaining[g][j] -= 1;
        out.assign(worker.id, RequesterId::from_index(j));
    }
    out
}

/// Maximum `Σ v_i` over feasible assignments of `workers` (no requester caps).
///
/// Each step takes the augmenting path with the largest gain: candidates are
/// tried by descending reputation (ties by ascending worker id) and kept when
/// an augmenting path exists. All reputations are positive, so the result is
/// also a min-cost max-flow with worker-arc cost `-v_i`.
pub fn max_reputation(inst: &Instance, workers: &[usize]) -> FlowResult {
    let mut order: Vec<usize> = workers.to_vec();
    order.sort_by(|&a, &b| {
        inst.worker(b)
            .reputation
            .cmp(&inst.worker(a).reputation)
            .then(a.cmp(&b))
    });
    let mut flow = GroupFlow::new(inst, &unbounded_caps(inst));
    let mut dead = vec![false; inst.num_groups()];
    let mut selected = Vec::new();
    for w in order {
        let g = inst.worker(w).group.index();
        if dead[g] {
            continue;
        }
        if flow.try_add(g) {
            selected.push(w);
        } else {
            dead[g] = true;
        }
    }
    let assignment = decode_groups(inst, &flow, &selected);
    FlowResult {
        flow_value: flow.value(),
        objective: assignment.total_reputation(inst),
        assignment,
    }
}

/// Independent route for [`max_reputation`]: min-cost max-flow on the
/// worker-level network with integer costs `-v_i · lcm(denominators)`.
pub fn max_reputation_min_cost(inst: &Instance, workers: &[usize]) -> FlowResult {
    let mut net = build_assignment_network(inst, workers, &unbounded_caps(inst));
    let scale = workers
        .iter()
        .fold(BigInt::one(), |acc, &w| acc.lcm(inst.worker(w).reputation.denom()));
    net.set_worker_costs(|w| {
        let v = &inst.worker(w.index()).reputation;
        -(v.numer() * (&scale / v.denom()))
    });
    let (mut result, cost) = min_cost_flow(&net, None);
    result.objective = BigRational::new(-cost, scale);
    result
}

/// The unique feasible selection of exactly `k` workers minimising
/// `Σ 2^position`, where `ordered[p]` holds position `p + 1`.
///
/// Equivalent to comparing selections lexicographically by their sorted
/// positions, so positions are added greedily in ascending order.
pub fn min_weight_at_cardinality(
    inst: &Instance,
    ordered: &[usize],
    k: u64,
    requester_caps: &[u64],
) -> Result<FlowResult, FlowError> {
    let mut flow = GroupFlow::new(inst, requester_caps);
    let mut dead = vec![false; inst.num_groups()];
    let mut selected = Vec::new();
    let mut objective = BigInt::zero();
    for (p, &w) in ordered.iter().enumerate() {
        if flow.value() == k {
            break;
        }
        let g = inst.worker(w).group.index();
        if dead[g] {
            continue;
        }
        if flow.try_add(g) {
            selected.push(w);
            objective += BigInt::one() << (p + 1);
        } else {
            dead[g] = true;
        }
    }
    if flow.value() < k {
        // finish the max-flow to report the true maximum
        let maximum = {
            let mut counts = vec![0u64; inst.num_groups()];
            for &w in ordered {
                counts[inst.worker(w).group.index()] += 1;
            }
            GroupFlow::new(inst, requester_caps).saturate(&counts)
        };
        return Err(FlowError::InfeasibleCardinality { requested: k, maximum });
    }
    Ok(FlowResult {
        flow_value: k,
        assignment: decode_groups(inst, &flow, &selected),
        objective: BigRational::from_integer(objective),
    })
}

/// Independent route for [`min_weight_at_cardinality`]: successive shortest
/// paths with exact big-integer costs `2^position`, stopped after `k` units.
pub fn min_weight_min_cost(
    inst: &Instance,
    ordered: &[usize],
    k: u64,
    requester_caps: &[u64],
) -> Result<FlowResult, FlowError> {
    let mut net = build_assignment_network(inst, ordered, requester_caps);
    let position: std::collections::HashMap<WorkerId, usize> = ordered
        .iter()
        .enumerate()
        .map(|(p, &w)| (inst.worker(w).id, p + 1))
        .collect();
    net.set_worker_costs(|w| BigInt::one() << position[&w]);
    let (result, _) = min_cost_flow(&net, Some(k));
    if result.flow_value < k {
        return Err(FlowError::InfeasibleCardinality {
            requested: k,
            maximum: result.flow_value,
        });
    }
    Ok(result)
}

/// Maximum cardinality for the given workers via the group-aggregated solver.
pub fn max_cardinality_fast(inst: &Instance, workers: &[usize], requester_caps: &[u64]) -> u64 {
    let mut counts = vec![0u64; inst.num_groups()];
    for &w in workers {
        counts[inst.worker(w).group.index()] += 1;
    }
    GroupFlow::new(inst, requester_caps).saturate(&counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::instance;

    fn all(inst: &Instance) -> Vec<usize> {
        (0..inst.n()).collect()
    }

    #[test]
    fn empty_network_has_zero_flow() {
        let inst = instance(&[("1", "1", 1)], &["4"], vec![vec![1]]);
        let net = build_assignment_network(&inst, &[], &[1]);
        assert_eq!(max_cardinality(&net).flow_value, 0);
    }

    #[test]
    fn tau_binds_same_group() {
        let inst = instance(&[("1", "1", 1), ("1", "1", 1)], &["4"], vec![vec![1]]);
        let net = build_assignment_network(&inst, &all(&inst), &[2]);
        let r = max_cardinality(&net);
        assert_eq!(r.flow_value, 1);
        assert!(r.assignment.check(&inst).is_empty());
    }

    #[test]
    fn two_groups_two_requesters_unit_caps() {
        // sizes (2, 1); all τ = 1; caps (1, 1) → 2 (checked against enumeration in tests/)
        let inst = instance(
            &[("1", "1", 1), ("1", "1", 1), ("1", "1", 2)],
            &["4", "4"],
            vec![vec![1, 1], vec![1, 1]],
        );
        let net = build_assignment_network(&inst, &all(&inst), &[1, 1]);
        assert_eq!(max_cardinality(&net).flow_value, 2);
        assert_eq!(max_cardinality_fast(&inst, &all(&inst), &[1, 1]), 2);
        let net0 = build_assignment_network(&inst, &all(&inst), &[0, 0]);
        assert_eq!(max_cardinality(&net0).flow_value, 0);
    }

    #[test]
    fn unconstrained_routes_everyone() {
        let inst = instance(
            &[("1", "1", 1), ("1", "1", 2), ("1", "1", 3)],
            &["4"],
            vec![vec![1], vec![1], vec![1]],
        );
        let net = build_assignment_network(&inst, &all(&inst), &unbounded_caps(&inst));
        assert_eq!(max_cardinality(&net).flow_value, 3);
    }

    #[test]
    fn max_reputation_prefers_low_ids_on_ties() {
        let inst = instance(
            &[("1", "2", 1), ("1", "1", 1), ("1", "1", 1)],
            &["4", "4"],
            vec![vec![1, 1]],
        );
        let r = max_reputation(&inst, &all(&inst));
        assert_eq!(r.objective, BigRational::from_integer(3.into()));
        assert_eq!(
            r.assignment.workers().collect::<Vec<_>>(),
            vec![WorkerId(1), WorkerId(2)]
        );
        assert_eq!(max_reputation_min_cost(&inst, &all(&inst)).objective, r.objective);
    }

    #[test]
    fn max_reputation_trivial_cases() {
        let inst = instance(&[("1", "7", 1)], &["4"], vec![vec![1]]);
        assert_eq!(
            max_reputation(&inst, &[0]).objective,
            BigRational::from_integer(7.into())
        );
        assert_eq!(max_reputation(&inst, &[]).objective, BigRational::zero());
    }

    #[test]
    fn min_weight_selects_lowest_positions() {
        let inst = instance(
            &[("1", "1", 1), ("1", "1", 2), ("1", "1", 3)],
            &["9"],
            vec![vec![3], vec![3], vec![3]],
        );
        let r = min_weight_at_cardinality(&inst, &all(&inst), 2, &[3]).unwrap();
        assert_eq!(
            r.assignment.workers().collect::<Vec<_>>(),
            vec![WorkerId(1), WorkerId(2)]
        );
        assert_eq!(r.objective, BigRational::from_integer(6.into()));
        let empty = min_weight_at_cardinality(&inst, &all(&inst), 0, &[3]).unwrap();
        assert!(empty.assignment.is_empty());
    }

    #[test]
    fn min_weight_one_group_two_requesters() {
        let inst = instance(
            &[("1", "1", 1), ("1", "1", 1), ("1", "1", 1)],
            &["4", "4"],
            vec![vec![1, 1]],
        );
        let r = min_weight_at_cardinality(&inst, &all(&inst), 2, &[1, 1]).unwrap();
        assert_eq!(
            r.assignment.workers().collect::<Vec<_>>(),
            vec![WorkerId(1), WorkerId(2)]
        );
        let twin = min_weight_min_cost(&inst, &all(&inst), 2, &[1, 1]).unwrap();
        assert_eq!(twin.objective, r.objective);
        assert_eq!(
            min_weight_at_cardinality(&inst, &all(&inst), 3, &[1, 1]),
            Err(FlowError::InfeasibleCardinality {
                requested: 3,
                maximum: 2
            })
        );
    }

    #[test]
    fn dot_output_is_stable() {
        let inst = instance(&[("1", "1", 1)], &["4"], vec![vec![1]]);
        let net = build_assignment_network(&inst, &[0], &[1]);
        let a = net.to_dot();
        assert_eq!(a, build_assignment_network(&inst, &[0], &[1]).to_dot());
        assert!(a.contains("n0 -> n1"));
        assert!(a.contains("label=\"s1\""));
    }
}
