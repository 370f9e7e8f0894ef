//! Unilateral-deviation probe. Outcomes of the mechanisms here are
//! piecewise constant in one worker's bid, with breakpoints at other bids,
//! virtual prices and (for the pooled mechanism) ratio and budget-share
//! thresholds; evaluating every breakpoint and every midpoint between
//! neighbouring breakpoints covers each piece.

use rayon::prelude::*;
use serde::Serialize;

use crate::care_co;
use crate::care_no;
use crate::flow;
use crate::model::{Instance, Money, Outcome, Rational, WorkerId};
use crate::pea;

/// A mechanism as seen by one strategic worker.
pub trait Mechanism: Sync {
    fn name(&self) -> &'static str;

    /// The worker's (expected) utility under the reported bids.
    fn utility(&self, inst: &Instance, worker: usize) -> Rational;

    /// Extra bid values where the outcome may change, beyond other bids and
    /// virtual prices.
    fn breakpoints(&self, _inst: &Instance, _worker: usize) -> Vec<Rational> {
        Vec::new()
    }
}

/// `p_i − c_i` for a winner, 0 otherwise.
pub fn utility(outcome: &Outcome, inst: &Instance, worker: usize) -> Rational {
    let w = inst.worker(worker);
    match outcome.payment_of(w.id) {
        Some(p) => p.as_rational() - w.true_cost().as_rational(),
        None => Rational::from_integer(0.into()),
    }
}

pub struct CareCoMechanism;

impl Mechanism for CareCoMechanism {
    fn name(&self) -> &'static str {
        "care-co"
    }

    fn utility(&self, inst: &Instance, worker: usize) -> Rational {
        utility(&care_co::run_care_co(inst), inst, worker)
    }

    fn breakpoints(&self, inst: &Instance, worker: usize) -> Vec<Rational> {
        let v = &inst.worker(worker).reputation;
        let others: Vec<usize> =
            care_co::CostEffectivenessOrder::of(inst, (0..inst.n()).filter(|&j| j != worker).collect())
                .as_slice()
                .to_vec();
        let pool = inst.total_budget().into_rational();
        let mut out = Vec::new();
        for &j in &others {
            out.push(care_co::price_per_reputation(inst, j) * v);
        }
        // budget test of the worker placed after the first q others
        for q in 0..=others.len() {
            let mut prefix = others[..q].to_vec();
            prefix.push(worker);
            let value = flow::max_reputation(inst, &prefix).objective;
            if value > Rational::from_integer(0.into()) {
                out.push(&pool * v / value);
            }
        }
        out
    }
}

/// Utility within the worker's own bucket, scaled by the sampling
/// probability `1/γ`. Buckets depend on reputations only.
pub struct CareNoExpectedMechanism;

impl Mechanism for CareNoExpectedMechanism {
    fn name(&self) -> &'static str {
        "care-no"
    }

    fn utility(&self, inst: &Instance, worker: usize) -> Rational {
        let partition = care_no::partition_buckets(inst);
        let bucket = partition
            .buckets
            .iter()
            .find(|b| b.contains(&worker))
            .expect("buckets partition the workers");
        let u = utility(&pea::run_pea(inst, bucket), inst, worker);
        u / Rational::from_integer(partition.gamma.into())
    }
}

/// PEA over all workers.
pub struct PeaMechanism;

impl Mechanism for PeaMechanism {
    fn name(&self) -> &'static str {
        "pea"
    }

    fn utility(&self, inst: &Instance, worker: usize) -> Rational {
        let all: Vec<usize> = (0..inst.n()).collect();
        utility(&pea::run_pea(inst, &all), inst, worker)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec {
    /// Relative perturbation `δ` around the true cost.
    pub delta: Rational,
    pub midpoints: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            delta: Rational::new(1.into(), 10.into()),
            midpoints: true,
        }
    }
}

/// Candidate bids for `worker`, ascending and distinct. Always contains the
/// true cost.
pub fn deviation_grid(inst: &Instance, mechanism: &dyn Mechanism, worker: usize, spec: &GridSpec) -> Vec<Money> {
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    let cost = inst.worker(worker).true_cost().as_rational().clone();
    let mut points: Vec<Rational> = vec![zero.clone(), cost.clone()];
    points.push(&cost * (&one + &spec.delta));
    points.push(&cost * (&one - &spec.delta));
    for (j, w) in inst.workers().iter().enumerate() {
        if j != worker {
            points.push(w.bid.as_rational().clone());
        }
    }
    for r in pea::virtual_prices(&inst.budgets(), inst.n()).descending() {
        points.push(r.as_rational().clone());
    }
    points.extend(mechanism.breakpoints(inst, worker));
    points.retain(|p| *p >= zero);
    points.sort();
    points.dedup();
    let top = points.last().cloned().unwrap_or(zero);
    points.push(top + &one);
    if spec.midpoints {
        let two = Rational::from_integer(2.into());
        let mids: Vec<Rational> = points.windows(2).map(|w| (&w[0] + &w[1]) / &two).collect();
        points.extend(mids);
        points.sort();
        points.dedup();
    }
    points
        .into_iter()
        .map(|p| Money::from_rational(p).expect("non-negative"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    pub worker: WorkerId,
    pub mechanism: &'static str,
    /// `max_b u(b) − u(c_i)`; positive means a profitable misreport.
    #[serde(with = "crate::model::rational_serde")]
    pub gain: Rational,
    /// A bid achieving the gain (smallest such), when it is positive.
    pub best_bid: Option<Money>,
    pub grid_size: usize,
}

/// Maximum utility gain of `worker` over the deviation grid, holding every
/// other bid fixed and measuring against its truthful report.
pub fn truthfulness_probe(
    inst: &Instance,
    mechanism: &dyn Mechanism,
    worker: WorkerId,
    spec: &GridSpec,
) -> ProbeReport {
    let i = worker.index();
    let cost = inst.worker(i).true_cost().clone();
    let truthful = inst.with_bid(i, cost);
    let base = mechanism.utility(&truthful, i);
    let grid = deviation_grid(&truthful, mechanism, i, spec);
    let gains: Vec<Rational> = grid
        .par_iter()
        .map(|b| mechanism.utility(&truthful.with_bid(i, b.clone()), i) - &base)
        .collect();
    let mut gain = Rational::from_integer(0.into());
    let mut best_bid = None;
    for (b, g) in grid.iter().zip(gains) {
        if g > gain {
            gain = g;
            best_bid = Some(b.clone());
        }
    }
    ProbeReport {
        worker,
        mechanism: mechanism.name(),
        gain,
        best_bid,
        grid_size: grid.len(),
    }
}
