//! Cooperative-budget mechanism: requesters pool their budgets, workers are
//! ranked by bid per unit of reputation, the key worker is the last one whose
//! price-per-reputation times the achievable reputation fits the pool, and
//! every winner is paid a uniform price per unit of reputation.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::Zero;

use crate::flow::{self, FlowResult};
use crate::model::{Instance, Money, Outcome, Rational, WorkerId, NO_KEY_WORKER};

/// Worker indices sorted by `b_i / v_i` ascending, ties by worker id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostEffectivenessOrder(Vec<usize>);

impl CostEffectivenessOrder {
    pub fn new(inst: &Instance) -> Self {
        Self::of(inst, (0..inst.n()).collect())
    }

    pub fn of(inst: &Instance, mut workers: Vec<usize>) -> Self {
        workers.sort_by(|&a, &b| compare_ratio(inst, a, b));
        CostEffectivenessOrder(workers)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Worker at 1-based position `p`.
    pub fn at(&self, p: usize) -> usize {
        self.0[p - 1]
    }
}

/// Cross-multiplied comparison of `b_a / v_a` and `b_b / v_b`, then ids.
pub fn compare_ratio(inst: &Instance, a: usize, b: usize) -> Ordering {
    let wa = inst.worker(a);
    let wb = inst.worker(b);
    let lhs = wa.bid.as_rational() * &wb.reputation;
    let rhs = wb.bid.as_rational() * &wa.reputation;
    lhs.cmp(&rhs).then(wa.id.cmp(&wb.id))
}

pub fn price_per_reputation(inst: &Instance, worker: usize) -> Rational {
    let w = inst.worker(worker);
    w.bid.as_rational() / &w.reputation
}

/// Optimal overall reputation `M(S_i)` of the first `prefix` workers in
/// `order`, with the maximising assignment.
pub fn orp(inst: &Instance, order: &CostEffectivenessOrder, prefix: usize) -> FlowResult {
    flow::max_reputation(inst, &order.as_slice()[..prefix])
}

/// Everything computed by one CARE-CO run, for diagnostics and checks.
#[derive(Debug, Clone)]
pub struct CareCoRun {
    pub order: CostEffectivenessOrder,
    /// Key worker position (1-based); 0 when even the first worker fails.
    pub key: usize,
    /// `prefix_values[i - 1] = M(S_i)` for every prefix the scan evaluated
    /// (up to and including `S_{k+1}` when it exists).
    pub prefix_values: Vec<Rational>,
    pub unit_price: Option<Rational>,
    pub outcome: Outcome,
}

impl CareCoRun {
    pub fn key_value(&self) -> Rational {
        if self.key == 0 {
            Rational::zero()
        } else {
            self.prefix_values[self.key - 1].clone()
        }
    }

    /// `M(S_{k+1})`, when the scan stopped before exhausting the workers.
    pub fn next_value(&self) -> Option<&Rational> {
        self.prefix_values.get(self.key)
    }
}

/// Sequential scan: prefixes pass while `(b_i / v_i) · M(S_i) ≤ B`; the
/// scan stops at the first failure. Returns `(k, M(S_1..))`.
fn scan(inst: &Instance, order: &CostEffectivenessOrder) -> (usize, Vec<Rational>) {
    let pool = inst.total_budget().into_rational();
    let mut values = Vec::with_capacity(order.len());
    for i in 1..=order.len() {
        let value = orp(inst, order, i).objective;
        let passes = price_per_reputation(inst, order.at(i)) * &value <= pool;
        values.push(value);
        if !passes {
            return (i - 1, values);
        }
    }
    (order.len(), values)
}

/// Position (1-based) of the key worker, 0 when no prefix passes.
pub fn find_key_worker(inst: &Instance) -> usize {
    scan(inst, &CostEffectivenessOrder::new(inst)).0
}

pub fn analyze_care_co(inst: &Instance) -> CareCoRun {
    let order = CostEffectivenessOrder::new(inst);
    let (key, prefix_values) = scan(inst, &order);
    if key == 0 {
        let mut outcome = Outcome::empty();
        outcome.diagnostics.flags.push(NO_KEY_WORKER.to_string());
        return CareCoRun {
            order,
            key,
            prefix_values,
            unit_price: None,
            outcome,
        };
    }
    let pool = inst.total_budget().into_rational();
    let key_value = &prefix_values[key - 1];
    let budget_share = (!key_value.is_zero()).then(|| &pool / key_value);
    let next_ratio = (key < order.len()).then(|| price_per_reputation(inst, order.at(key + 1)));
    // min over whichever terms are defined; with k = n only B / M(S_k) remains
    let unit_price = match (next_ratio, budget_share) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };

    let solution = orp(inst, &order, key);
    let mut amounts = BTreeMap::new();
    if let Some(price) = &unit_price {
        for w in solution.assignment.workers() {
            let v = &inst.worker(w.index()).reputation;
            let pay = Money::from_rational(v * price).expect("non-negative payment");
            amounts.insert(w, pay);
        }
    }
    let mut outcome = Outcome::from_parts(inst, solution.assignment, amounts);
    outcome.diagnostics.key_worker = Some(inst.worker(order.at(key)).id);
    outcome.diagnostics.key_position = Some(key);
    outcome.diagnostics.unit_price = unit_price.clone();
    outcome.diagnostics.orp_key = Some(key_value.clone());
    outcome.diagnostics.orp_next = prefix_values.get(key).cloned();
    CareCoRun {
        order,
        key,
        prefix_values,
        unit_price,
        outcome,
    }
}

pub fn run_care_co(inst: &Instance) -> Outcome {
    let run = analyze_care_co(inst);
    if cfg!(debug_assertions) {
        // prefix values are recomputed from scratch, never extended
        for (i, v) in run.prefix_values.iter().enumerate() {
            debug_assert_eq!(*v, orp(inst, &run.order, i + 1).objective);
        }
    }
    run.outcome
}

/// `M(S_{k+1}) − M(S_k) ≤ v_{k+1}`; vacuous when `k = n`.
pub fn padding_bound_holds(inst: &Instance, run: &CareCoRun) -> bool {
    match run.next_value() {
        None => true,
        Some(next) => {
            let v = &inst.worker(run.order.at(run.key + 1)).reputation;
            next - run.key_value() <= *v
        }
    }
}

pub fn key_worker_id(inst: &Instance, run: &CareCoRun) -> Option<WorkerId> {
    (run.key > 0).then(|| inst.worker(run.order.at(run.key)).id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::instance;
    use num_bigint::BigInt;

    fn int(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    fn worked_example() -> Instance {
        instance(&[("1", "1", 1), ("2", "1", 1), ("6", "1", 1)], &["10"], vec![vec![2]])
    }

    #[test]
    fn orp_prefixes() {
        let inst = instance(&[("1", "1", 1), ("1", "1", 1), ("1", "1", 1)], &["10"], vec![vec![2]]);
        let order = CostEffectivenessOrder::new(&inst);
        assert_eq!(orp(&inst, &order, 0).objective, int(0));
        assert!(orp(&inst, &order, 0).assignment.is_empty());
        assert_eq!(orp(&inst, &order, 2).objective, int(2));
        assert_eq!(orp(&inst, &order, 3).objective, int(2));
    }

    #[test]
    fn key_worker_replay() {
        // 1·1 ≤ 10, 2·2 ≤ 10, 6·2 > 10
        assert_eq!(find_key_worker(&worked_example()), 2);
    }

    #[test]
    fn worked_example_payments() {
        let inst = worked_example();
        let out = run_care_co(&inst);
        assert_eq!(out.winners(), vec![WorkerId(1), WorkerId(2)]);
        assert_eq!(out.payment_of(WorkerId(1)), Some(&Money::from_integer(5)));
        assert_eq!(out.payment_of(WorkerId(2)), Some(&Money::from_integer(5)));
        assert_eq!(out.total_paid(), Money::from_integer(10));
        assert_eq!(out.diagnostics.unit_price, Some(int(5)));
        assert_eq!(out.diagnostics.key_position, Some(2));
    }

    #[test]
    fn loop_never_breaks_uses_budget_share() {
        let inst = instance(&[("1", "1", 1), ("2", "1", 1)], &["100"], vec![vec![2]]);
        let run = analyze_care_co(&inst);
        assert_eq!(run.key, 2);
        assert_eq!(run.unit_price, Some(int(50)));
        assert!(padding_bound_holds(&inst, &run));
    }

    #[test]
    fn single_worker_takes_the_pool() {
        let inst = instance(&[("3", "2", 1)], &["40"], vec![vec![1]]);
        let out = run_care_co(&inst);
        assert_eq!(out.payment_of(WorkerId(1)), Some(&Money::from_integer(40)));
    }

    #[test]
    fn unaffordable_first_worker_yields_empty_outcome() {
        let inst = instance(&[("50", "1", 1)], &["40"], vec![vec![1]]);
        let out = run_care_co(&inst);
        assert!(out.assignment.is_empty());
        assert_eq!(out.diagnostics.flags, vec![NO_KEY_WORKER.to_string()]);
    }

    #[test]
    fn ratio_order_breaks_ties_by_id() {
        let inst = instance(&[("2", "2", 1), ("1", "1", 1), ("3", "1", 1)], &["10"], vec![vec![3]]);
        assert_eq!(CostEffectivenessOrder::new(&inst).as_slice(), &[0, 1, 2]);
    }
}
