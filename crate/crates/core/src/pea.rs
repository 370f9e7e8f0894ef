//! Virtual-price sub-mechanism for workers treated as having equal
//! reputation.
//!
//! Candidate clearing prices are the quotients `B_j / t`. At price `r` the
//! requesters can afford `E(r) = Σ_j ⌊B_j / r⌋` workers, and `M_f(r)` of the
//! workers bidding at most `r` can actually be placed under the compatibility
//! thresholds and the caps `⌊B_j / r⌋`. The critical price is the smallest
//! `r` with `E(r) = M_f(r)`; winners are the unique minimum-`Σ 2^i` placement
//! at that price, and each winner is paid the largest next-bid under which it
//! still wins, capped at the critical price.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::flow::{self, FlowError, GroupFlow};
use crate::model::{Assignment, Instance, Money, Outcome, WorkerId, NO_CRITICAL_PRICE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PeaError {
    #[error("worker {0} is not a winner under truthful bids")]
    NotAWinner(WorkerId),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// `{B_j / t : j ≤ m, 1 ≤ t ≤ n}`, deduplicated, largest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualPriceSet(Vec<Money>);

impl VirtualPriceSet {
    pub fn descending(&self) -> &[Money] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, r: &Money) -> bool {
        self.0.binary_search_by(|p| r.cmp(p)).is_ok()
    }

    /// The next smaller and next larger element around `r`.
    pub fn adjacent(&self, r: &Money) -> (Option<Money>, Option<Money>) {
        let lower = self.0.iter().find(|p| *p < r).cloned();
        let higher = self.0.iter().rev().find(|p| *p > r).cloned();
        (lower, higher)
    }
}

pub fn virtual_prices(budgets: &[Money], n: usize) -> VirtualPriceSet {
    let mut prices: Vec<Money> = budgets
        .iter()
        .flat_map(|b| (1..=n as u64).map(move |t| b.checked_div(&Money::from_integer(t)).expect("t >= 1")))
        .collect();
    prices.sort_unstable_by(|a, b| b.cmp(a));
    prices.dedup();
    VirtualPriceSet(prices)
}

/// `E(r) = Σ_j ⌊B_j / r⌋`.
pub fn employability(r: &Money, budgets: &[Money]) -> u64 {
    budgets
        .iter()
        .map(|b| b.floor_div_u64(r).expect("price must be positive"))
        .sum()
}

/// `⌊B_j / r⌋` per requester.
pub fn requester_caps(r: &Money, budgets: &[Money]) -> Vec<u64> {
    budgets
        .iter()
        .map(|b| b.floor_div_u64(r).expect("price must be positive"))
        .collect()
}

/// Workers of `workers` bidding at most `r`, in bid order.
pub fn available_workers(inst: &Instance, workers: &[usize], r: &Money) -> Vec<usize> {
    bid_order(inst, workers)
        .into_iter()
        .filter(|&w| inst.worker(w).bid <= *r)
        .collect()
}

/// `M_f(r)`: most workers from `S(r)` placeable under compatibility and caps.
pub fn osp(r: &Money, inst: &Instance, workers: &[usize]) -> u64 {
    let avail = available_workers(inst, workers, r);
    flow::max_cardinality_fast(inst, &avail, &requester_caps(r, &inst.budgets()))
}

/// Worker indices sorted by bid ascending, ties by worker id.
pub fn bid_order(inst: &Instance, workers: &[usize]) -> Vec<usize> {
    let mut order = workers.to_vec();
    order.sort_by(|&a, &b| inst.worker(a).bid.cmp(&inst.worker(b).bid).then(a.cmp(&b)));
    order
}

/// Bid-independent data: prices ascending with their employability and caps.
#[derive(Debug, Clone)]
pub struct PeaMarket {
    prices: Vec<Money>,
    employ: Vec<u64>,
    caps: Vec<Vec<u64>>,
}

impl PeaMarket {
    pub fn new(budgets: &[Money], n: usize) -> Self {
        let mut prices = virtual_prices(budgets, n).0;
        prices.reverse();
        let caps: Vec<Vec<u64>> = prices.iter().map(|r| requester_caps(r, budgets)).collect();
        let employ = caps.iter().map(|c| c.iter().sum()).collect();
        PeaMarket { prices, employ, caps }
    }

    pub fn price(&self, k: usize) -> &Money {
        &self.prices[k]
    }

    /// Smallest price index `k` with `bid ≤ prices[k]` (`len` if none).
    fn price_index(&self, bid: &Money) -> usize {
        self.prices.partition_point(|p| p < bid)
    }
}

/// One entry of a (possibly counterfactual) bid order.
#[derive(Debug, Clone, Copy)]
struct Entry {
    worker: usize,
    group: usize,
    /// Index of the smallest virtual price this bid fits under.
    price_index: usize,
    /// Position in the truthful order whose bid this entry carries.
    bid_of: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PriceRecord {
    pub price: Money,
    pub employability: u64,
    pub max_selected: u64,
}

/// Element of a winner's candidate payment set; `Unbounded` stands in for the
/// missing next bid after the last position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PaymentCandidate {
    Bid(Money),
    Unbounded,
}

impl Serialize for PaymentCandidate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PaymentCandidate::Bid(m) => m.serialize(s),
            PaymentCandidate::Unbounded => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PeaTrace {
    /// One record per virtual price, largest price first.
    pub records: Vec<PriceRecord>,
    pub critical_price: Option<Money>,
    /// Adjacent virtual prices below and above the critical price.
    pub critical_lower: Option<Money>,
    pub critical_higher: Option<Money>,
    /// Last worker (in bid order) whose bid does not exceed the critical price.
    pub last_affordable: Option<WorkerId>,
    pub candidate_sets: BTreeMap<WorkerId, Vec<PaymentCandidate>>,
}

struct Allocation {
    critical: Option<usize>,
    max_selected: u64,
    /// Selected positions in the order, ascending.
    selected: Vec<usize>,
}

fn allocate(
    inst: &Instance,
    market: &PeaMarket,
    order: &[Entry],
    mut records: Option<&mut Vec<PriceRecord>>,
) -> Allocation {
    let groups = inst.num_groups();
    let m = inst.m();
    let mut counts = vec![0u64; groups];
    let mut size = 0usize;
    let mut critical = None;
    let mut max_selected = 0;
    for k in 0..market.prices.len() {
        while size < order.len() && order[size].price_index <= k {
            counts[order[size].group] += 1;
            size += 1;
        }
        let need = market.employ[k];
        let caps = &market.caps[k];
        let tracing = records.is_some();
        if !tracing && (size as u64) < need {
            continue;
        }
        if !tracing {
            let bound: u64 = (0..m)
                .map(|j| {
                    let by_groups: u64 = (0..groups).map(|l| inst.tau().get(l, j).min(counts[l])).sum();
                    by_groups.min(caps[j])
                })
                .sum();
            if bound < need {
                continue;
            }
        }
        let selected = GroupFlow::new(inst, caps).saturate(&counts);
        if let Some(rec) = records.as_deref_mut() {
            rec.push(PriceRecord {
                price: market.prices[k].clone(),
                employability: need,
                max_selected: selected,
            });
        }
        if selected == need && critical.is_none() {
            critical = Some(k);
            max_selected = selected;
            if !tracing {
                break;
            }
        }
    }
    let Some(k) = critical else {
        return Allocation {
            critical: None,
            max_selected: 0,
            selected: Vec::new(),
        };
    };
    let mut flow = GroupFlow::new(inst, &market.caps[k]);
    let mut dead = vec![false; groups];
    let mut selected = Vec::with_capacity(max_selected as usize);
    for (p, e) in order.iter().enumerate() {
        if flow.value() == max_selected || e.price_index > k {
            break;
        }
        if dead[e.group] {
            continue;
        }
        if flow.try_add(e.group) {
            selected.push(p);
        } else {
            dead[e.group] = true;
        }
    }
    debug_assert_eq!(flow.value(), max_selected);
    Allocation {
        critical,
        max_selected,
        selected,
    }
}

/// Truthful-order view of a worker subset with its market.
struct PeaContext<'a> {
    inst: &'a Instance,
    market: PeaMarket,
    order: Vec<Entry>,
}

impl<'a> PeaContext<'a> {
    fn new(inst: &'a Instance, workers: &[usize]) -> Self {
        let market = PeaMarket::new(&inst.budgets(), workers.len());
        let order = bid_order(inst, workers)
            .into_iter()
            .enumerate()
            .map(|(p, w)| Entry {
                worker: w,
                group: inst.worker(w).group.index(),
                price_index: market.price_index(&inst.worker(w).bid),
                bid_of: p,
            })
            .collect();
        PeaContext { inst, market, order }
    }

    fn bid_at(&self, position: usize) -> &Money {
        &self.inst.worker(self.order[position].worker).bid
    }

    /// `b_{l+1}` in the truthful order, unbounded past the end.
    fn next_bid(&self, l: usize) -> PaymentCandidate {
        match self.order.get(l + 1) {
            Some(_) => PaymentCandidate::Bid(self.bid_at(l + 1).clone()),
            None => PaymentCandidate::Unbounded,
        }
    }

    /// First position whose bid is at least the bid at `i`.
    fn first_not_below(&self, i: usize) -> usize {
        let b = self.bid_at(i);
        self.order.partition_point(|e| self.inst.worker(e.worker).bid < *b)
    }

    /// Re-runs the allocation with the worker at position `i` moved to bid
    /// `b_l`, placed immediately after the worker holding position `l`.
    fn still_wins(&self, i: usize, l: usize) -> bool {
        let mut order = Vec::with_capacity(self.order.len());
        let mut moved = self.order[i];
        moved.price_index = self.order[l].price_index;
        moved.bid_of = self.order[l].bid_of;
        let mut at = None;
        if l == i {
            order.extend_from_slice(&self.order);
            at = Some(i);
        } else {
            for (p, e) in self.order.iter().enumerate() {
                if p != i {
                    order.push(*e);
                }
                if p == l {
                    at = Some(order.len());
                    order.push(moved);
                }
            }
        }
        let at = at.expect("l is a valid position");
        allocate(self.inst, &self.market, &order, None)
            .selected
            .binary_search(&at)
            .is_ok()
    }

    /// The full candidate set `P_i` for the winner at position `i`.
    fn candidate_set(&self, i: usize) -> Vec<PaymentCandidate> {
        (self.first_not_below(i)..self.order.len())
            .filter(|&l| self.still_wins(i, l))
            .map(|l| self.next_bid(l))
            .collect()
    }

    /// `min{r*, max P_i}`. Candidates are non-decreasing in `l`, so the scan
    /// first looks for any winning `l` whose next bid already reaches `r*`,
    /// then walks the rest downward and stops at the first win.
    fn payment(&self, i: usize, critical: &Money) -> Money {
        let start = self.first_not_below(i);
        let n = self.order.len();
        let reaches = |l: usize| match self.next_bid(l) {
            PaymentCandidate::Unbounded => true,
            PaymentCandidate::Bid(b) => b >= *critical,
        };
        let l0 = (start..n).find(|&l| reaches(l)).unwrap_or(n);
        if (l0..n).any(|l| self.still_wins(i, l)) {
            return critical.clone();
        }
        for l in (start..l0).rev() {
            if self.still_wins(i, l) {
                return match self.next_bid(l) {
                    PaymentCandidate::Bid(b) => b.min(critical.clone()),
                    PaymentCandidate::Unbounded => critical.clone(),
                };
            }
        }
        unreachable!("a truthful winner wins at its own position")
    }
}

/// Full PEA run with trace.
#[derive(Debug, Clone)]
pub struct PeaRun {
    pub trace: PeaTrace,
    pub outcome: Outcome,
}

/// Smallest `r ∈ R_b` with `E(r) = M_f(r)`, plus the full per-price table.
pub fn critical_price(inst: &Instance, workers: &[usize]) -> (Option<Money>, PeaTrace) {
    if workers.is_empty() {
        return (None, PeaTrace::default());
    }
    let ctx = PeaContext::new(inst, workers);
    let mut records = Vec::new();
    let alloc = allocate(inst, &ctx.market, &ctx.order, Some(&mut records));
    records.reverse();
    let critical = alloc.critical.map(|k| ctx.market.price(k).clone());
    let mut trace = PeaTrace {
        records,
        ..PeaTrace::default()
    };
    if let Some(r) = &critical {
        let set = virtual_prices(&inst.budgets(), workers.len());
        let (lo, hi) = set.adjacent(r);
        trace.critical_lower = lo;
        trace.critical_higher = hi;
        trace.last_affordable = ctx
            .order
            .iter()
            .rev()
            .find(|e| inst.worker(e.worker).bid <= *r)
            .map(|e| inst.worker(e.worker).id);
    }
    trace.critical_price = critical.clone();
    (critical, trace)
}

/// Minimum-weight placement of exactly `M_f(r*)` workers from `S(r*)`.
pub fn select_winners(critical: &Money, inst: &Instance, workers: &[usize]) -> Result<Assignment, PeaError> {
    let avail = available_workers(inst, workers, critical);
    let caps = requester_caps(critical, &inst.budgets());
    let k = flow::max_cardinality_fast(inst, &avail, &caps);
    Ok(flow::min_weight_at_cardinality(inst, &avail, k, &caps)?.assignment)
}

/// Threshold payment of one truthful winner.
pub fn compute_payment(winner: WorkerId, inst: &Instance, workers: &[usize]) -> Result<Money, PeaError> {
    let ctx = PeaContext::new(inst, workers);
    let alloc = allocate(inst, &ctx.market, &ctx.order, None);
    let critical = alloc.critical.ok_or(PeaError::NotAWinner(winner))?;
    let pos = alloc
        .selected
        .iter()
        .copied()
        .find(|&p| inst.worker(ctx.order[p].worker).id == winner)
        .ok_or(PeaError::NotAWinner(winner))?;
    Ok(ctx.payment(pos, ctx.market.price(critical)))
}

/// The literal candidate set `P_i`: every `l` with `b_l ≥ b_i` where the
/// winner survives, contributing `b_{l+1}`.
pub fn payment_candidates(
    winner: WorkerId,
    inst: &Instance,
    workers: &[usize],
) -> Result<Vec<PaymentCandidate>, PeaError> {
    let ctx = PeaContext::new(inst, workers);
    let alloc = allocate(inst, &ctx.market, &ctx.order, None);
    let pos = alloc
        .selected
        .iter()
        .copied()
        .find(|&p| inst.worker(ctx.order[p].worker).id == winner)
        .ok_or(PeaError::NotAWinner(winner))?;
    Ok(ctx.candidate_set(pos))
}

/// Allocation only (no payments): the winners for the given workers.
pub fn pea_winners(inst: &Instance, workers: &[usize]) -> Vec<WorkerId> {
    if workers.is_empty() {
        return Vec::new();
    }
    let ctx = PeaContext::new(inst, workers);
    let alloc = allocate(inst, &ctx.market, &ctx.order, None);
    let mut ids: Vec<WorkerId> = alloc
        .selected
        .iter()
        .map(|&p| inst.worker(ctx.order[p].worker).id)
        .collect();
    ids.sort();
    ids
}

pub fn run_pea(inst: &Instance, workers: &[usize]) -> Outcome {
    analyze_pea(inst, workers, false).outcome
}

/// Runs PEA on `workers`; with `full_trace` the per-price table covers every
/// virtual price and the candidate sets `P_i` are recorded.
pub fn analyze_pea(inst: &Instance, workers: &[usize], full_trace: bool) -> PeaRun {
    if workers.is_empty() {
        return PeaRun {
            trace: PeaTrace::default(),
            outcome: Outcome::empty(),
        };
    }
    let ctx = PeaContext::new(inst, workers);
    let mut records = Vec::new();
    let alloc = allocate(
        inst,
        &ctx.market,
        &ctx.order,
        if full_trace { Some(&mut records) } else { None },
    );
    records.reverse();
    let Some(k) = alloc.critical else {
        let mut outcome = Outcome::empty();
        outcome.diagnostics.flags.push(NO_CRITICAL_PRICE.to_string());
        return PeaRun {
            trace: PeaTrace {
                records,
                ..PeaTrace::default()
            },
            outcome,
        };
    };
    let critical = ctx.market.price(k).clone();
    let caps = &ctx.market.caps[k];
    let available: Vec<usize> = ctx
        .order
        .iter()
        .take_while(|e| e.price_index <= k)
        .map(|e| e.worker)
        .collect();
    let chosen =
        flow::min_weight_at_cardinality(inst, &available, alloc.max_selected, caps).expect("M_f(r*) is feasible at r*");
    debug_assert_eq!(
        chosen.assignment.workers().collect::<Vec<_>>(),
        {
            let mut ids: Vec<_> = alloc
                .selected
                .iter()
                .map(|&p| inst.worker(ctx.order[p].worker).id)
                .collect();
            ids.sort();
            ids
        },
        "fast and reference winner selection agree"
    );

    let payments: Vec<(WorkerId, Money, Option<Vec<PaymentCandidate>>)> = alloc
        .selected
        .par_iter()
        .map(|&p| {
            let id = inst.worker(ctx.order[p].worker).id;
            let pay = ctx.payment(p, &critical);
            let set = full_trace.then(|| ctx.candidate_set(p));
            (id, pay, set)
        })
        .collect();

    let mut amounts = BTreeMap::new();
    let mut candidate_sets = BTreeMap::new();
    for (id, pay, set) in payments {
        amounts.insert(id, pay);
        if let Some(s) = set {
            candidate_sets.insert(id, s);
        }
    }
    let mut outcome = Outcome::from_parts(inst, chosen.assignment, amounts);
    outcome.diagnostics.critical_price = Some(critical.clone());
    for (j, r) in inst.requesters().iter().enumerate() {
        debug_assert!(outcome.spend_of(r.id) <= r.budget, "requester {} over budget", j + 1);
    }

    let set = virtual_prices(&inst.budgets(), workers.len());
    let (lo, hi) = set.adjacent(&critical);
    let trace = PeaTrace {
        records,
        critical_price: Some(critical.clone()),
        critical_lower: lo,
        critical_higher: hi,
        last_affordable: available.last().map(|&w| inst.worker(w).id),
        candidate_sets,
    };
    PeaRun { trace, outcome }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::instance;

    fn m(s: &str) -> Money {
        s.parse().unwrap()
    }

    /// bids (1,1,3), one group with τ = 1 per requester, budgets (4,4)
    fn running_example() -> Instance {
        instance(
            &[("1", "1", 1), ("1", "1", 1), ("3", "1", 1)],
            &["4", "4"],
            vec![vec![1, 1]],
        )
    }

    #[test]
    fn virtual_price_sets() {
        assert_eq!(
            virtual_prices(&[m("4"), m("4")], 3).descending(),
            &[m("4"), m("2"), m("4/3")]
        );
        assert_eq!(
            virtual_prices(&[m("6"), m("4")], 2).descending(),
            &[m("6"), m("4"), m("3"), m("2")]
        );
        assert_eq!(virtual_prices(&[m("5")], 1).descending(), &[m("5")]);
    }

    #[test]
    fn employability_floors() {
        let b = [m("4"), m("4")];
        assert_eq!(employability(&m("2"), &b), 4);
        assert_eq!(employability(&m("3"), &b), 2);
        assert_eq!(employability(&m("5"), &b), 0);
    }

    #[test]
    fn osp_values() {
        let inst = running_example();
        let all = [0, 1, 2];
        assert_eq!(osp(&m("4"), &inst, &all), 2);
        assert_eq!(osp(&m("4/3"), &inst, &all), 2);
        assert_eq!(osp(&m("1/2"), &inst, &all), 0);
    }

    #[test]
    fn critical_price_running_example() {
        let inst = running_example();
        let (r, trace) = critical_price(&inst, &[0, 1, 2]);
        assert_eq!(r, Some(m("4")));
        let table: Vec<(Money, u64, u64)> = trace
            .records
            .iter()
            .map(|x| (x.price.clone(), x.employability, x.max_selected))
            .collect();
        assert_eq!(table, vec![(m("4"), 2, 2), (m("2"), 4, 2), (m("4/3"), 6, 2)]);
        assert_eq!(trace.critical_lower, Some(m("2")));
        assert_eq!(trace.critical_higher, None);
        assert_eq!(trace.last_affordable, Some(WorkerId(3)));
    }

    #[test]
    fn no_critical_price_when_employability_is_never_met() {
        let inst = instance(&[("1", "1", 1)], &["4", "4"], vec![vec![1, 1]]);
        assert_eq!(critical_price(&inst, &[0]).0, None);
        let out = run_pea(&inst, &[0]);
        assert!(out.assignment.is_empty());
        assert_eq!(out.diagnostics.flags, vec![NO_CRITICAL_PRICE.to_string()]);
    }

    #[test]
    fn single_worker_single_requester() {
        let inst = instance(&[("1", "1", 1)], &["4"], vec![vec![1]]);
        assert_eq!(critical_price(&inst, &[0]).0, Some(m("4")));
        let out = run_pea(&inst, &[0]);
        assert_eq!(out.payment_of(WorkerId(1)), Some(&m("4")));
    }

    #[test]
    fn running_example_winners_and_payments() {
        let inst = running_example();
        let all = [0, 1, 2];
        let winners = select_winners(&m("4"), &inst, &all).unwrap();
        assert_eq!(winners.workers().collect::<Vec<_>>(), vec![WorkerId(1), WorkerId(2)]);
        assert_eq!(
            payment_candidates(WorkerId(1), &inst, &all).unwrap(),
            // behind s_3 (order s_2, s_3, s_1) the minimum-weight pair is {s_2, s_3}
            vec![PaymentCandidate::Bid(m("1")), PaymentCandidate::Bid(m("3"))]
        );
        let out = run_pea(&inst, &all);
        assert_eq!(out.winners(), vec![WorkerId(1), WorkerId(2)]);
        assert_eq!(out.payment_of(WorkerId(1)), Some(&m("3")));
        assert_eq!(out.payment_of(WorkerId(2)), Some(&m("3")));
        for r in inst.requesters() {
            assert_eq!(out.spend_of(r.id), m("3"));
        }
        assert_eq!(
            compute_payment(WorkerId(3), &inst, &all),
            Err(PeaError::NotAWinner(WorkerId(3)))
        );
    }

    #[test]
    fn everyone_available_wins_when_forced() {
        let inst = instance(&[("1", "1", 1), ("2", "1", 2)], &["10"], vec![vec![1], vec![1]]);
        let out = run_pea(&inst, &[0, 1]);
        assert_eq!(out.winners().len(), 2);
    }

    #[test]
    fn empty_worker_list() {
        let inst = running_example();
        assert_eq!(run_pea(&inst, &[]), Outcome::empty());
    }

    #[test]
    fn full_trace_records_every_price() {
        let inst = running_example();
        let run = analyze_pea(&inst, &[0, 1, 2], true);
        assert_eq!(run.trace.records.len(), 3);
        assert_eq!(run.trace.candidate_sets.len(), 2);
    }
}
