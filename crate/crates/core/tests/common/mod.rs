//! Test-side brute force, written independently of the library solvers.

#![allow(dead_code)]

use care::model::{Instance, Rational};
use num_traits::Zero;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum BudgetRule {
    Ignore,
    /// True costs of the selected workers sum to at most `Σ B_j`.
    Pooled,
    /// Each requester's selected true costs fit its own budget.
    PerRequester,
}

/// Calls `visit` with every feasible assignment of `workers`: entry `k` is
/// the requester index of `workers[k]`, or `None` for unassigned.
pub fn for_each_assignment(
    inst: &Instance,
    workers: &[usize],
    caps: &[u64],
    rule: BudgetRule,
    mut visit: impl FnMut(&[Option<usize>]),
) {
    let m = inst.m();
    let n = workers.len();
    let mut choice = vec![None; n];
    let total = (m as u64 + 1).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for slot in choice.iter_mut() {
            let d = (c % (m as u64 + 1)) as usize;
            c /= m as u64 + 1;
            *slot = if d == 0 { None } else { Some(d - 1) };
        }
        if feasible(inst, workers, caps, rule, &choice) {
            visit(&choice);
        }
    }
}

fn feasible(inst: &Instance, workers: &[usize], caps: &[u64], rule: BudgetRule, choice: &[Option<usize>]) -> bool {
    let m = inst.m();
    let mut per_group = vec![0u64; inst.num_groups() * m];
    let mut per_req = vec![0u64; m];
    let mut spend = vec![Rational::zero(); m];
    for (k, c) in choice.iter().enumerate() {
        if let Some(j) = *c {
            let w = inst.worker(workers[k]);
            per_group[w.group.index() * m + j] += 1;
            per_req[j] += 1;
            spend[j] += w.true_cost().as_rational();
        }
    }
    for g in 0..inst.num_groups() {
        for j in 0..m {
            if per_group[g * m + j] > inst.tau().get(g, j) {
                return false;
            }
        }
    }
    if per_req.iter().zip(caps).any(|(c, cap)| c > cap) {
        return false;
    }
    match rule {
        BudgetRule::Ignore => true,
        BudgetRule::Pooled => {
            let total: Rational = spend.iter().fold(Rational::zero(), |a, b| a + b);
            total <= *inst.total_budget().as_rational()
        }
        BudgetRule::PerRequester => spend
            .iter()
            .zip(inst.requesters())
            .all(|(s, r)| s <= r.budget.as_rational()),
    }
}

/// Best `Σ v_i` over feasible assignments.
pub fn best_reputation(inst: &Instance, workers: &[usize], caps: &[u64], rule: BudgetRule) -> Rational {
    let mut best = Rational::zero();
    for_each_assignment(inst, workers, caps, rule, |choice| {
        let v = choice
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_some())
            .fold(Rational::zero(), |a, (k, _)| a + &inst.worker(workers[k]).reputation);
        if v > best {
            best = v;
        }
    });
    best
}

pub fn best_cardinality(inst: &Instance, workers: &[usize], caps: &[u64]) -> u64 {
    let mut best = 0;
    for_each_assignment(inst, workers, caps, BudgetRule::Ignore, |choice| {
        best = best.max(choice.iter().filter(|c| c.is_some()).count() as u64);
    });
    best
}

/// Positions (1-based in `workers`) of the minimum `Σ 2^p` selection of
/// exactly `k` workers, if any.
pub fn min_weight_positions(inst: &Instance, workers: &[usize], caps: &[u64], k: u64) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    for_each_assignment(inst, workers, caps, BudgetRule::Ignore, |choice| {
        let pos: Vec<usize> = (0..choice.len())
            .filter(|&p| choice[p].is_some())
            .map(|p| p + 1)
            .collect();
        if pos.len() as u64 != k {
            return;
        }
        // Σ 2^p order equals comparing position sets from the top down
        let key = |v: &Vec<usize>| v.iter().rev().copied().collect::<Vec<_>>();
        if best.as_ref().is_none_or(|b| key(&pos) < key(b)) {
            best = Some(pos);
        }
    });
    best
}
