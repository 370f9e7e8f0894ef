//! Comparison mechanisms from the evaluation: random pricing and the pooled
//! proportional-share extension (labelled `rrafl-ext`).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::draw_cents;
use crate::care_co::{price_per_reputation, CostEffectivenessOrder};
use crate::model::{Assignment, Instance, Money, Outcome, Rational, RequesterId, NO_KEY_WORKER};
use crate::rng;

/// `(min bid, max bid)` for every worker, when no generator tiers are known.
pub fn bid_ranges(inst: &Instance) -> Vec<(Money, Money)> {
    let lo = inst
        .workers()
        .iter()
        .map(|w| w.bid.clone())
        .min()
        .unwrap_or_else(Money::zero);
    let hi = inst
        .workers()
        .iter()
        .map(|w| w.bid.clone())
        .max()
        .unwrap_or_else(Money::zero);
    vec![(lo, hi); inst.n()]
}

/// Per worker (by id) a price is drawn uniformly from its range; a worker
/// whose bid does not exceed the price is placed with a random requester that
/// can still afford the price without breaking compatibility, and paid the
/// price.
pub fn run_ranpri(inst: &Instance, ranges: &[(Money, Money)], seed: u64) -> Outcome {
    assert_eq!(ranges.len(), inst.n());
    let mut r = rng::stream(seed, rng::STREAM_RANPRI);
    let mut remaining = inst.budgets();
    let mut used = vec![vec![0u64; inst.m()]; inst.num_groups()];
    let mut assignment = Assignment::new();
    let mut amounts = BTreeMap::new();
    for (i, (lo, hi)) in ranges.iter().enumerate() {
        let w = inst.worker(i);
        let price = draw_cents(&mut r, lo, hi);
        if price < w.bid {
            continue;
        }
        let g = w.group.index();
        let open: Vec<usize> = (0..inst.m())
            .filter(|&j| remaining[j] >= price && used[g][j] < inst.tau().get(g, j))
            .collect();
        let Some(&j) = open.choose(&mut r) else {
            continue;
        };
        remaining[j] = Money::from_rational(remaining[j].as_rational() - price.as_rational()).expect("affordable");
        used[g][j] += 1;
        assignment.assign(w.id, RequesterId::from_index(j));
        amounts.insert(w.id, price);
    }
    Outcome::from_parts(inst, assignment, amounts)
}

/// Proportional share on the pooled budget without compatibility-aware
/// selection: the prefix of the `b/v` order passes while
/// `(b_i / v_i) · Σ_{t ≤ i} v_t ≤ Σ_j B_j`; winners are paid
/// `v_i · min(b_{k+1}/v_{k+1}, B / Σ v)` and then placed with random
/// requesters, dropping any that would break compatibility.
pub fn run_rrafl_ext(inst: &Instance, seed: u64) -> Outcome {
    let order = CostEffectivenessOrder::new(inst);
    let pool = inst.total_budget().into_rational();
    let mut total = Rational::from_integer(0.into());
    let mut key = 0;
    let mut key_total = total.clone();
    for p in 1..=order.len() {
        let w = order.at(p);
        total += &inst.worker(w).reputation;
        if price_per_reputation(inst, w) * &total > pool {
            break;
        }
        key = p;
        key_total = total.clone();
    }
    if key == 0 {
        let mut out = Outcome::empty();
        out.diagnostics.flags.push(NO_KEY_WORKER.to_string());
        return out;
    }
    let share = &pool / &key_total;
    let unit = if key < order.len() {
        price_per_reputation(inst, order.at(key + 1)).min(share)
    } else {
        share
    };
    let mut r = rng::stream(seed, rng::STREAM_RRAFL);
    let mut used = vec![vec![0u64; inst.m()]; inst.num_groups()];
    let mut assignment = Assignment::new();
    let mut amounts = BTreeMap::new();
    for &w in &order.as_slice()[..key] {
        let worker = inst.worker(w);
        let g = worker.group.index();
        let open: Vec<usize> = (0..inst.m()).filter(|&j| used[g][j] < inst.tau().get(g, j)).collect();
        // the draw happens even when nothing is open, keeping later draws aligned
        let pick = r.gen_range(0..open.len().max(1));
        let Some(&j) = open.get(pick) else {
            continue;
        };
        used[g][j] += 1;
        assignment.assign(worker.id, RequesterId::from_index(j));
        amounts.insert(
            worker.id,
            Money::from_rational(&worker.reputation * &unit).expect("non-negative"),
        );
    }
    let mut out = Outcome::from_parts(inst, assignment, amounts);
    out.diagnostics.unit_price = Some(unit);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::care_co::run_care_co;
    use crate::model::testing::instance;
    use crate::model::WorkerId;

    #[test]
    fn price_below_every_bid_selects_nobody() {
        let inst = instance(&[("5", "1", 1), ("6", "1", 1)], &["40"], vec![vec![2]]);
        let ranges = vec![(Money::from_integer(1), Money::from_integer(2)); 2];
        assert!(run_ranpri(&inst, &ranges, 3).assignment.is_empty());
    }

    #[test]
    fn single_worker_paid_its_price() {
        let inst = instance(&[("2", "1", 1)], &["40"], vec![vec![1]]);
        let ranges = vec![(Money::from_integer(3), Money::from_integer(3))];
        let out = run_ranpri(&inst, &ranges, 1);
        assert_eq!(out.payment_of(WorkerId(1)), Some(&Money::from_integer(3)));
    }

    #[test]
    fn ranpri_is_seeded() {
        let inst = instance(
            &[("2", "1", 1), ("3", "1", 1), ("4", "1", 2)],
            &["5", "6"],
            vec![vec![1, 1], vec![1, 1]],
        );
        let ranges = bid_ranges(&inst);
        assert_eq!(run_ranpri(&inst, &ranges, 9), run_ranpri(&inst, &ranges, 9));
        let out = run_ranpri(&inst, &ranges, 9);
        assert!(out.check_requester_budgets(&inst).is_empty());
        assert!(out.check(&inst).is_empty());
    }

    #[test]
    fn slack_compatibility_matches_care_co_winners() {
        let inst = instance(
            &[("1", "1", 1), ("2", "1", 2), ("6", "1", 1)],
            &["6", "4"],
            vec![vec![3, 3], vec![3, 3]],
        );
        let a = run_rrafl_ext(&inst, 4);
        let b = run_care_co(&inst);
        assert_eq!(a.winners(), b.winners());
        assert_eq!(a.total_paid(), b.total_paid());
    }

    #[test]
    fn zero_tau_empties_rrafl() {
        let inst = instance(&[("1", "1", 1), ("2", "1", 1)], &["10"], vec![vec![0]]);
        assert!(run_rrafl_ext(&inst, 1).assignment.is_empty());
        assert_eq!(run_rrafl_ext(&inst, 1), run_rrafl_ext(&inst, 1));
    }
}
