//! Synthetic scenarios in the style of the paper's evaluation, baseline
//! mechanisms, and batch sweeps with CSV/JSON reports.

mod baselines;
mod experiment;
mod properties;
mod random;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    default_epsilon, rational_serde, CompatibilityMatrix, GroupId, Instance, ModelError, Money, Rational, Requester,
    RequesterId, Worker, WorkerId,
};
use crate::rng;

pub use baselines::{bid_ranges, run_ranpri, run_rrafl_ext};
pub use experiment::{
    run_experiment, summarize, ExperimentReport, Failure, MechanismKind, PointSummary, ReportRow, Sweep, SweepAxis,
    CSV_HEADER,
};
pub use properties::{
    approximation_bounds, check, trial_instance, trial_seed, verify, Counterexample, Property, VerifyReport,
};
pub use random::{random_instance, RandomSpec};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Accuracy interval `[accuracy_lo, accuracy_hi)` (closed above for the top
/// tier) and the bid range of workers in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracyTier {
    #[serde(with = "rational_serde")]
    pub accuracy_lo: Rational,
    #[serde(with = "rational_serde")]
    pub accuracy_hi: Rational,
    pub bid_lo: Money,
    pub bid_hi: Money,
}

impl AccuracyTier {
    fn new(lo: (i64, i64), hi: (i64, i64), bids: (u64, u64)) -> Self {
        AccuracyTier {
            accuracy_lo: Rational::new(lo.0.into(), lo.1.into()),
            accuracy_hi: Rational::new(hi.0.into(), hi.1.into()),
            bid_lo: Money::from_integer(bids.0),
            bid_hi: Money::from_integer(bids.1),
        }
    }

    pub fn midpoint(&self) -> Rational {
        (&self.accuracy_lo + &self.accuracy_hi) / Rational::from_integer(2.into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub n_workers: usize,
    pub n_requesters: usize,
    pub n_groups: usize,
    pub budget_lo: Money,
    pub budget_hi: Money,
    pub accuracy_tiers: Vec<AccuracyTier>,
    /// Reputation is the tier's accuracy midpoint plus a jitter drawn in
    /// hundredths from `[-reputation_jitter, reputation_jitter]`.
    #[serde(with = "rational_serde")]
    pub reputation_jitter: Rational,
    #[serde(with = "rational_serde")]
    pub epsilon: Rational,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            n_workers: 120,
            n_requesters: 5,
            n_groups: 10,
            budget_lo: Money::from_integer(40),
            budget_hi: Money::from_integer(80),
            accuracy_tiers: vec![
                AccuracyTier::new((2, 5), (3, 5), (2, 4)),
                AccuracyTier::new((3, 5), (4, 5), (3, 5)),
                AccuracyTier::new((4, 5), (1, 1), (4, 6)),
            ],
            reputation_jitter: Rational::new(1.into(), 20.into()),
            epsilon: default_epsilon(),
        }
    }
}

/// Description written into report headers.
pub const REPUTATION_PROXY: &str = "v_i = accuracy tier midpoint + uniform jitter (hundredths)";

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidParams(m.to_string()));
        if self.n_workers == 0 || self.n_requesters == 0 || self.n_groups == 0 {
            return bad("counts must be positive");
        }
        if self.budget_lo > self.budget_hi || self.budget_lo.is_zero() {
            return bad("budget range must be non-empty and positive");
        }
        if self.accuracy_tiers.is_empty() {
            return bad("at least one accuracy tier is required");
        }
        let mut tiers = self.accuracy_tiers.clone();
        tiers.sort_by(|a, b| a.accuracy_lo.cmp(&b.accuracy_lo));
        for t in &tiers {
            if t.accuracy_lo >= t.accuracy_hi || t.bid_lo > t.bid_hi {
                return bad("tier ranges must be non-empty");
            }
            if t.midpoint() <= self.reputation_jitter {
                return bad("jitter could make a reputation non-positive");
            }
        }
        if tiers.windows(2).any(|w| w[0].accuracy_hi != w[1].accuracy_lo) {
            return bad("accuracy tiers must be contiguous and non-overlapping");
        }
        if self.epsilon <= Rational::from_integer(1.into()) {
            return bad("epsilon must exceed 1");
        }
        Ok(())
    }
}

/// A generated instance plus the per-worker cost range RanPri draws from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub instance: Instance,
    pub price_ranges: Vec<(Money, Money)>,
}

fn hundredths(m: &Money) -> i64 {
    (m.as_rational() * Rational::from_integer(100.into()))
        .floor()
        .to_integer()
        .try_into()
        .expect("money range fits in i64 hundredths")
}

/// Uniform 2-decimal amount in `[lo, hi]`.
pub(crate) fn draw_cents(rng: &mut impl Rng, lo: &Money, hi: &Money) -> Money {
    let (a, b) = (hundredths(lo), hundredths(hi));
    let c = rng.gen_range(a..=b.max(a));
    Money::from_rational(Rational::new(c.into(), 100.into())).expect("non-negative")
}

pub fn generate_scenario(params: &GeneratorParams, seed: u64) -> Result<Scenario, HarnessError> {
    params.validate()?;
    // separate streams per component, so sweep points sharing a seed share
    // every draw their parameters allow
    let mut r = rng::stream(seed, rng::STREAM_GENERATOR);
    let mut r_groups = rng::stream(seed, rng::STREAM_GENERATOR_GROUPS);
    let mut r_budgets = rng::stream(seed, rng::STREAM_GENERATOR_BUDGETS);
    let mut r_tau = rng::stream(seed, rng::STREAM_GENERATOR_TAU);
    let jitter_max: i64 = (&params.reputation_jitter * Rational::from_integer(100.into()))
        .floor()
        .to_integer()
        .try_into()
        .map_err(|_| HarnessError::InvalidParams("jitter too large".into()))?;
    let mut workers = Vec::with_capacity(params.n_workers);
    let mut price_ranges = Vec::with_capacity(params.n_workers);
    for i in 0..params.n_workers {
        let tier = &params.accuracy_tiers[r.gen_range(0..params.accuracy_tiers.len())];
        let bid = draw_cents(&mut r, &tier.bid_lo, &tier.bid_hi);
        let jitter = Rational::new(r.gen_range(-jitter_max..=jitter_max).into(), 100.into());
        let group = GroupId::from_index(r_groups.gen_range(0..params.n_groups));
        workers.push(Worker {
            id: WorkerId::from_index(i),
            group,
            cost: Some(bid.clone()),
            bid,
            reputation: tier.midpoint() + jitter,
        });
        price_ranges.push((tier.bid_lo.clone(), tier.bid_hi.clone()));
    }
    let requesters: Vec<Requester> = (0..params.n_requesters)
        .map(|j| Requester {
            id: RequesterId::from_index(j),
            budget: draw_cents(&mut r_budgets, &params.budget_lo, &params.budget_hi),
        })
        .collect();
    let mut sizes = vec![0u64; params.n_groups];
    for w in &workers {
        sizes[w.group.index()] += 1;
    }
    // an empty group gets τ = 0, which constrains nothing
    let tau: Vec<Vec<u64>> = sizes
        .iter()
        .map(|&size| {
            (0..params.n_requesters)
                .map(|_| if size == 0 { 0 } else { r_tau.gen_range(1..=size) })
                .collect()
        })
        .collect();
    let instance = Instance::new(
        workers,
        requesters,
        CompatibilityMatrix::new(tau),
        params.epsilon.clone(),
        seed,
    )?;
    Ok(Scenario { instance, price_ranges })
}

pub fn generate_instance(params: &GeneratorParams, seed: u64) -> Result<Instance, HarnessError> {
    Ok(generate_scenario(params, seed)?.instance)
}
