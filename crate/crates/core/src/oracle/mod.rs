//! Exhaustive ground truth for desk-scale instances: optimal benchmarks
//! paying true costs, a brute-force twin of the flow solvers, a
//! strategic-deviation probe, and executable lemma checks.

mod lemmas;
mod probe;
mod search;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::model::{rational_serde, Assignment, Instance, Money, Rational, RequesterId};
use search::{Best, Budget, Problem, Sense};

pub use lemmas::{check_lemma1, check_lemma2, check_lemma3, check_padding_bound, LemmaViolation};
pub use probe::{
    deviation_grid, truthfulness_probe, utility, CareCoMechanism, CareNoExpectedMechanism, GridSpec, Mechanism,
    PeaMechanism, ProbeReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("enumeration bound exceeded: {workers} workers / {requesters} requesters (limit {max_workers} / {max_requesters})")]
    EnumerationBoundExceeded {
        workers: usize,
        requesters: usize,
        max_workers: usize,
        max_requesters: usize,
    },
    #[error("no assignment of exactly {requested} workers (maximum {maximum})")]
    Infeasible { requested: u64, maximum: u64 },
    #[error("values too large for exact enumeration")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBounds {
    pub max_workers: usize,
    pub max_requesters: usize,
}

impl EnumerationBounds {
    pub const BENCHMARK: EnumerationBounds = EnumerationBounds {
        max_workers: 10,
        max_requesters: 4,
    };
    pub const IP: EnumerationBounds = EnumerationBounds {
        max_workers: 8,
        max_requesters: 3,
    };

    fn check(&self, workers: usize, requesters: usize) -> Result<(), OracleError> {
        if workers > self.max_workers || requesters > self.max_requesters {
            return Err(OracleError::EnumerationBoundExceeded {
                workers,
                requesters,
                max_workers: self.max_workers,
                max_requesters: self.max_requesters,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptResult {
    #[serde(with = "rational_serde")]
    pub value: Rational,
    pub assignment: Assignment,
    /// Sum of the selected workers' true costs.
    pub cost_paid: Money,
}

fn decode(inst: &Instance, slots: &[usize], best: &Best) -> Assignment {
    let mut out = Assignment::new();
    for (k, &c) in best.choice.iter().enumerate() {
        if c > 0 {
            out.assign(inst.worker(slots[k]).id, RequesterId::from_index(c - 1));
        }
    }
    out
}

fn result(inst: &Instance, assignment: Assignment, value: Rational) -> OptResult {
    let cost_paid = assignment
        .workers()
        .map(|w| inst.worker(w.index()).true_cost().clone())
        .sum();
    OptResult {
        value,
        assignment,
        cost_paid,
    }
}

fn tau_rows(inst: &Instance) -> Vec<Vec<u64>> {
    inst.tau().rows().to_vec()
}

#[derive(Clone, Copy)]
enum Setting {
    Cooperative,
    NonCooperative,
}

fn opt(inst: &Instance, setting: Setting, bounds: EnumerationBounds) -> Result<OptResult, OracleError> {
    bounds.check(inst.n(), inst.m())?;
    let slots: Vec<usize> = (0..inst.n()).collect();
    let mut money: Vec<&BigRational> = inst.workers().iter().map(|w| w.true_cost().as_rational()).collect();
    let budgets = inst.budgets();
    let pool = inst.total_budget();
    money.extend(budgets.iter().map(|b| b.as_rational()));
    money.push(pool.as_rational());
    let (scaled, _) = search::scale(&money)?;
    let n = inst.n();
    let budget = match setting {
        Setting::Cooperative => Budget::Pooled(scaled[n + inst.m()]),
        Setting::NonCooperative => Budget::PerRequester(scaled[n..n + inst.m()].to_vec()),
    };
    let reps: Vec<&BigRational> = inst.workers().iter().map(|w| &w.reputation).collect();
    let (weights, denom) = search::scale(&reps)?;
    let problem = Problem {
        groups: inst.workers().iter().map(|w| w.group.index()).collect(),
        tau: tau_rows(inst),
        caps: vec![n as u64; inst.m()],
        costs: scaled[..n].to_vec(),
        budget,
        weights,
        sense: Sense::Maximise,
        cardinality: None,
    };
    let best = problem.solve().expect("the empty assignment is always feasible");
    let value = BigRational::new(BigInt::from(best.score), denom);
    Ok(result(inst, decode(inst, &slots, &best), value))
}

/// Maximum `Σ v_i` over compatible assignments whose true costs fit the
/// pooled budget `Σ B_j`.
pub fn opt_cooperative(inst: &Instance) -> Result<OptResult, OracleError> {
    opt(inst, Setting::Cooperative, EnumerationBounds::BENCHMARK)
}

pub fn opt_cooperative_with(inst: &Instance, bounds: EnumerationBounds) -> Result<OptResult, OracleError> {
    opt(inst, Setting::Cooperative, bounds)
}

/// Maximum `Σ v_i` over compatible assignments where each requester's
/// assigned true costs fit its own budget.
pub fn opt_noncooperative(inst: &Instance) -> Result<OptResult, OracleError> {
    opt(inst, Setting::NonCooperative, EnumerationBounds::BENCHMARK)
}

pub fn opt_noncooperative_with(inst: &Instance, bounds: EnumerationBounds) -> Result<OptResult, OracleError> {
    opt(inst, Setting::NonCooperative, bounds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpObjective {
    MaxCardinality,
    MaxReputation,
    /// Exactly `K` workers minimising `Σ 2^position`.
    MinWeightAt(u64),
}

/// Worker subset (in position order) and per-requester caps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IpConstraints {
    pub workers: Vec<usize>,
    pub caps: Vec<u64>,
}

impl IpConstraints {
    pub fn all(inst: &Instance) -> Self {
        IpConstraints {
            workers: (0..inst.n()).collect(),
            caps: vec![inst.n() as u64; inst.m()],
        }
    }
}

/// Exact optimum of the assignment IP by enumerating every vector in
/// `{0..m}^n`. For `MinWeightAt(K)` the value is `Σ 2^position` with
/// 1-based positions in `constraints.workers`.
pub fn ip_enumerate(
    inst: &Instance,
    objective: IpObjective,
    constraints: &IpConstraints,
) -> Result<OptResult, OracleError> {
    ip_enumerate_with(inst, objective, constraints, EnumerationBounds::IP)
}

pub fn ip_enumerate_with(
    inst: &Instance,
    objective: IpObjective,
    constraints: &IpConstraints,
    bounds: EnumerationBounds,
) -> Result<OptResult, OracleError> {
    let slots = &constraints.workers;
    bounds.check(slots.len(), inst.m())?;
    let (weights, denom, sense, cardinality) = match objective {
        IpObjective::MaxCardinality => (vec![1; slots.len()], BigInt::from(1), Sense::Maximise, None),
        IpObjective::MaxReputation => {
            let reps: Vec<&BigRational> = slots.iter().map(|&w| &inst.worker(w).reputation).collect();
            let (w, d) = search::scale(&reps)?;
            (w, d, Sense::Maximise, None)
        }
        IpObjective::MinWeightAt(k) => {
            let w = (0..slots.len()).map(|p| 1i128 << (p + 1)).collect();
            (w, BigInt::from(1), Sense::Minimise, Some(k))
        }
    };
    let problem = Problem {
        groups: slots.iter().map(|&w| inst.worker(w).group.index()).collect(),
        tau: tau_rows(inst),
        caps: constraints.caps.clone(),
        costs: vec![0; slots.len()],
        budget: Budget::Unlimited,
        weights,
        sense,
        cardinality,
    };
    match problem.solve() {
        Some(best) => {
            let value = BigRational::new(BigInt::from(best.score), denom);
            Ok(result(inst, decode(inst, slots, &best), value))
        }
        None => {
            let requested = cardinality.unwrap_or(0);
            let maximum = ip_enumerate_with(inst, IpObjective::MaxCardinality, constraints, bounds)?
                .assignment
                .len() as u64;
            Err(OracleError::Infeasible { requested, maximum })
        }
    }
}
