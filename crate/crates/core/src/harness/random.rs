//! Small random instances for property checks: coarse bid steps so ties are
//! common, tight budgets, and a spread of reputations wide enough to give
//! several buckets.

use rand::Rng;

use crate::model::{CompatibilityMatrix, GroupId, Instance, Money, Rational, Requester, RequesterId, Worker, WorkerId};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSpec {
    pub max_workers: usize,
    pub max_requesters: usize,
    pub max_groups: usize,
    /// Bids are multiples of `1 / bid_denominator` in `[1, bid_max]` units.
    pub bid_denominator: u64,
    pub bid_max: u64,
    pub budget_min: u64,
    pub budget_max: u64,
    /// Reputations are integers in `[1, reputation_max]`.
    pub reputation_max: u64,
    /// ε is drawn from these.
    pub epsilons: Vec<u64>,
    /// Allow `τ = 0` entries.
    pub zero_tau: bool,
}

impl RandomSpec {
    /// `n ≤ max_workers, m ≤ max_requesters, L ≤ max_groups`.
    pub fn small(max_workers: usize, max_requesters: usize, max_groups: usize) -> Self {
        RandomSpec {
            max_workers,
            max_requesters,
            max_groups,
            bid_denominator: 2,
            bid_max: 6,
            budget_min: 2,
            budget_max: 24,
            reputation_max: 20,
            epsilons: vec![2, 3, 10],
            zero_tau: true,
        }
    }
}

pub fn random_instance(spec: &RandomSpec, seed: u64) -> Instance {
    let mut r = rng::stream(seed, rng::STREAM_TRIALS);
    let n = r.gen_range(1..=spec.max_workers);
    let m = r.gen_range(1..=spec.max_requesters);
    let groups = r.gen_range(1..=spec.max_groups.min(n));
    let d = spec.bid_denominator;
    let workers: Vec<Worker> = (0..n)
        .map(|i| {
            // the first `groups` workers cover every group
            let g = if i < groups { i } else { r.gen_range(0..groups) };
            let bid = Money::ratio(r.gen_range(d..=spec.bid_max * d), d);
            Worker {
                id: WorkerId::from_index(i),
                group: GroupId::from_index(g),
                cost: Some(bid.clone()),
                bid,
                reputation: Rational::from_integer(r.gen_range(1..=spec.reputation_max).into()),
            }
        })
        .collect();
    let requesters: Vec<Requester> = (0..m)
        .map(|j| Requester {
            id: RequesterId::from_index(j),
            budget: Money::from_integer(r.gen_range(spec.budget_min..=spec.budget_max)),
        })
        .collect();
    let mut sizes = vec![0u64; groups];
    for w in &workers {
        sizes[w.group.index()] += 1;
    }
    let low = if spec.zero_tau { 0 } else { 1 };
    let tau = sizes
        .iter()
        .map(|&s| (0..m).map(|_| r.gen_range(low..=s)).collect())
        .collect();
    let epsilon = spec.epsilons[r.gen_range(0..spec.epsilons.len())];
    Instance::new(
        workers,
        requesters,
        CompatibilityMatrix::new(tau),
        Rational::from_integer(epsilon.into()),
        seed,
    )
    .expect("generated instances are valid")
}
