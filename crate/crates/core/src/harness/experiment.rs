//! Sweeps over the number of requesters or groups, every mechanism run on
//! the same instance per (point, seed).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{generate_scenario, run_ranpri, run_rrafl_ext, GeneratorParams, HarnessError, REPUTATION_PROXY};
use crate::care_co::run_care_co;
use crate::care_no::{self, CareNoOutput, NoMode};
use crate::model::{rational_serde, Instance, Money, Outcome, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    CareCo,
    CareNo,
    Ranpri,
    RraflExt,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 4] = [
        MechanismKind::CareCo,
        MechanismKind::CareNo,
        MechanismKind::Ranpri,
        MechanismKind::RraflExt,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MechanismKind::CareCo => "care-co",
            MechanismKind::CareNo => "care-no",
            MechanismKind::Ranpri => "ranpri",
            MechanismKind::RraflExt => "rrafl-ext",
        }
    }
}

impl FromStr for MechanismKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "co" | "care-co" => Ok(MechanismKind::CareCo),
            "no" | "care-no" => Ok(MechanismKind::CareNo),
            "ranpri" => Ok(MechanismKind::Ranpri),
            "rrafl" | "rrafl-ext" => Ok(MechanismKind::RraflExt),
            _ => Err(format!("unknown mechanism `{}`", s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Requesters,
    Groups,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::Requesters => "requesters",
            SweepAxis::Groups => "groups",
        }
    }

    /// The evaluation's default points and the value the other axis is held at.
    pub fn default_points(self) -> Vec<usize> {
        match self {
            SweepAxis::Requesters => (2..=12).step_by(2).collect(),
            SweepAxis::Groups => (4..=24).step_by(4).collect(),
        }
    }

    pub fn apply(self, base: &GeneratorParams, value: usize) -> GeneratorParams {
        let mut p = base.clone();
        match self {
            SweepAxis::Requesters => {
                p.n_requesters = value;
                p.n_groups = 10;
            }
            SweepAxis::Groups => {
                p.n_groups = value;
                p.n_requesters = 5;
            }
        }
        p
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "requesters" => Ok(SweepAxis::Requesters),
            "groups" => Ok(SweepAxis::Groups),
            _ => Err(format!("unknown sweep axis `{}`", s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub points: Vec<usize>,
}

impl Sweep {
    pub fn default_for(axis: SweepAxis) -> Self {
        Sweep {
            axis,
            points: axis.default_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub axis: SweepAxis,
    pub value: usize,
    pub seed: u64,
    pub mechanism: MechanismKind,
    /// `Σ v_i` over assigned workers, recomputed from the instance (the mean
    /// over buckets for CARE-NO).
    #[serde(with = "rational_serde")]
    pub reputation: Rational,
    #[serde(with = "rational_serde")]
    pub total_paid: Rational,
    pub max_requester_spend: Money,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub value: usize,
    pub seed: u64,
    pub mechanism: Option<MechanismKind>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub reputation_proxy: &'static str,
    pub axis: SweepAxis,
    pub points: Vec<usize>,
    pub seeds: Vec<u64>,
    pub mechanisms: Vec<MechanismKind>,
    pub rows: Vec<ReportRow>,
    pub failures: Vec<Failure>,
}

pub const CSV_HEADER: [&str; 8] = [
    "axis",
    "value",
    "seed",
    "mechanism",
    "reputation",
    "total_paid",
    "max_requester_spend",
    "runtime_ms",
];

fn decimal(r: &Rational) -> String {
    let n = r.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = r.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    format!("{:.6}", n / d)
}

impl ExperimentReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.axis.label().to_string(),
                r.value.to_string(),
                r.seed.to_string(),
                r.mechanism.label().to_string(),
                decimal(&r.reputation),
                decimal(&r.total_paid),
                decimal(r.max_requester_spend.as_rational()),
                format!("{:.3}", r.runtime_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sum of reputations of the assigned workers, straight from the instance.
fn recount(inst: &Instance, outcome: &Outcome) -> Rational {
    outcome
        .assignment
        .workers()
        .map(|w| inst.worker(w.index()).reputation.clone())
        .fold(Rational::from_integer(0.into()), |a, b| a + b)
}

struct Measured {
    reputation: Rational,
    total_paid: Rational,
    max_spend: Money,
}

/// Runs one mechanism and checks its outcomes against the setting's rules.
fn measure(inst: &Instance, ranges: &[(Money, Money)], kind: MechanismKind) -> Result<Measured, String> {
    let seed = inst.seed();
    let (outcomes, pooled): (Vec<Outcome>, bool) = match kind {
        MechanismKind::CareCo => (vec![run_care_co(inst)], true),
        MechanismKind::RraflExt => (vec![run_rrafl_ext(inst, seed)], true),
        MechanismKind::Ranpri => (vec![run_ranpri(inst, ranges, seed)], false),
        MechanismKind::CareNo => match care_no::run_care_no(inst, NoMode::Expectation) {
            CareNoOutput::Expectation(d) => (d.per_bucket, false),
            CareNoOutput::Sampled { .. } => unreachable!("expectation mode requested"),
        },
    };
    let mut reputation = Rational::from_integer(0.into());
    let mut paid = Rational::from_integer(0.into());
    let mut max_spend = Money::zero();
    for o in &outcomes {
        let mut problems = o.check(inst);
        problems.extend(if pooled {
            o.check_pooled_budget(inst)
        } else {
            o.check_requester_budgets(inst)
        });
        if let Some(v) = problems.first() {
            return Err(format!("outcome violates {}", v.code()));
        }
        let r = recount(inst, o);
        if r != o.total_reputation {
            return Err("reported reputation differs from the recomputed value".into());
        }
        reputation += r;
        paid += o.total_paid().into_rational();
        max_spend = max_spend.max(o.max_requester_spend());
    }
    let k = Rational::from_integer(outcomes.len().max(1).into());
    Ok(Measured {
        reputation: reputation / &k,
        total_paid: paid / &k,
        max_spend,
    })
}

pub fn run_experiment(
    sweep: &Sweep,
    params: &GeneratorParams,
    seeds: &[u64],
    mechanisms: &[MechanismKind],
) -> ExperimentReport {
    let cells: Vec<(usize, u64)> = sweep
        .points
        .iter()
        .flat_map(|&v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let results: Vec<(Vec<ReportRow>, Vec<Failure>)> = cells
        .par_iter()
        .map(|&(value, seed)| {
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            let p = sweep.axis.apply(params, value);
            // the same seed at every point: points differ only in the swept parameter
            let scenario = match generate_scenario(&p, seed) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(Failure {
                        value,
                        seed,
                        mechanism: None,
                        message: e.to_string(),
                    });
                    return (rows, failures);
                }
            };
            for &kind in mechanisms {
                let start = Instant::now();
                let run = catch_unwind(AssertUnwindSafe(|| {
                    measure(&scenario.instance, &scenario.price_ranges, kind)
                }))
                .unwrap_or_else(|_| Err("mechanism panicked".into()));
                let runtime_ms = start.elapsed().as_secs_f64() * 1000.0;
                match run {
                    Ok(m) => rows.push(ReportRow {
                        axis: sweep.axis,
                        value,
                        seed,
                        mechanism: kind,
                        reputation: m.reputation,
                        total_paid: m.total_paid,
                        max_requester_spend: m.max_spend,
                        runtime_ms,
                    }),
                    Err(message) => failures.push(Failure {
                        value,
                        seed,
                        mechanism: Some(kind),
                        message,
                    }),
                }
            }
            (rows, failures)
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in results {
        rows.extend(r);
        failures.extend(f);
    }
    ExperimentReport {
        reputation_proxy: REPUTATION_PROXY,
        axis: sweep.axis,
        points: sweep.points.clone(),
        seeds: seeds.to_vec(),
        mechanisms: mechanisms.to_vec(),
        rows,
        failures,
    }
}

/// Mean reputation per (point, mechanism), in sweep order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PointSummary {
    pub value: usize,
    pub mechanism: MechanismKind,
    pub trials: usize,
    #[serde(with = "rational_serde")]
    pub mean_reputation: Rational,
}

pub fn summarize(report: &ExperimentReport) -> Vec<PointSummary> {
    let mut out = Vec::new();
    for &value in &report.points {
        for &mechanism in &report.mechanisms {
            let reps: Vec<&Rational> = report
                .rows
                .iter()
                .filter(|r| r.value == value && r.mechanism == mechanism)
                .map(|r| &r.reputation)
                .collect();
            if reps.is_empty() {
                continue;
            }
            let sum = reps.iter().fold(Rational::from_integer(0.into()), |a, b| a + *b);
            out.push(PointSummary {
                value,
                mechanism,
                trials: reps.len(),
                mean_reputation: sum / Rational::from_integer(reps.len().into()),
            });
        }
    }
    out
}
