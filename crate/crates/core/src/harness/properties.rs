//! Seeded property checks over random corpora, as run by `care verify`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::random::{random_instance, RandomSpec};
use crate::care_co::run_care_co;
use crate::care_no::{self, CareNoOutput, NoMode};
use crate::model::{validate, Instance, Outcome, Rational};
use crate::oracle::{self, CareCoMechanism, CareNoExpectedMechanism, GridSpec, Mechanism};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Ir,
    Budget,
    Truthful,
    Approx,
    Lemmas,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::Ir,
        Property::Budget,
        Property::Truthful,
        Property::Approx,
        Property::Lemmas,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Property::Ir => "ir",
            Property::Budget => "budget",
            Property::Truthful => "truthful",
            Property::Approx => "approx",
            Property::Lemmas => "lemmas",
        }
    }

    /// Corpus each property is checked on; sizes stay inside what the
    /// exhaustive oracles can enumerate.
    pub fn corpus(self) -> RandomSpec {
        match self {
            Property::Ir | Property::Budget => RandomSpec::small(30, 6, 8),
            Property::Truthful => RandomSpec::small(6, 3, 3),
            Property::Approx => RandomSpec::small(10, 3, 4),
            Property::Lemmas => RandomSpec::small(7, 3, 3),
        }
    }

    /// The approximation bounds presuppose every bid is affordable by some
    /// requester; other properties hold on any instance.
    fn needs_valid_instance(self) -> bool {
        matches!(self, Property::Approx)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL
            .into_iter()
            .find(|p| p.label() == s)
            .ok_or_else(|| format!("unknown property `{}`", s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub trial: u64,
    pub seed: u64,
    pub details: Vec<String>,
    #[serde(skip)]
    pub instance: Instance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub property: Property,
    pub trials: u64,
    pub checked: u64,
    /// Instances rejected by validation (approximation only).
    pub skipped: u64,
    pub counterexamples: Vec<Counterexample>,
}

pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    rng::derive(seed, rng::STREAM_TRIALS, trial)
}

fn bucket_outcomes(inst: &Instance) -> Vec<Outcome> {
    match care_no::run_care_no(inst, NoMode::Expectation) {
        CareNoOutput::Expectation(d) => d.per_bucket,
        CareNoOutput::Sampled { outcome, .. } => vec![outcome],
    }
}

fn describe(prefix: &str, violations: Vec<crate::model::Violation>) -> Vec<String> {
    violations
        .into_iter()
        .map(|v| {
            format!(
                "{}: {}",
                prefix,
                serde_json::to_string(&v).unwrap_or_else(|_| v.code().into())
            )
        })
        .collect()
}

fn check_ir(inst: &Instance) -> Vec<String> {
    let mut out = describe("care-co", run_care_co(inst).check_individual_rationality(inst));
    for (h, o) in bucket_outcomes(inst).iter().enumerate() {
        out.extend(describe(
            &format!("care-no bucket {}", h + 1),
            o.check_individual_rationality(inst),
        ));
    }
    out
}

fn check_budget(inst: &Instance) -> Vec<String> {
    let co = run_care_co(inst);
    let mut v = co.check(inst);
    v.extend(co.check_pooled_budget(inst));
    let mut out = describe("care-co", v);
    for (h, o) in bucket_outcomes(inst).iter().enumerate() {
        let mut v = o.check(inst);
        v.extend(o.check_requester_budgets(inst));
        out.extend(describe(&format!("care-no bucket {}", h + 1), v));
    }
    out
}

fn check_truthful(inst: &Instance) -> Vec<String> {
    let mechanisms: [&dyn Mechanism; 2] = [&CareCoMechanism, &CareNoExpectedMechanism];
    let spec = GridSpec::default();
    let mut out = Vec::new();
    for m in mechanisms {
        for w in inst.workers() {
            let report = oracle::truthfulness_probe(inst, m, w.id, &spec);
            if report.gain > Rational::from_integer(0.into()) {
                out.push(format!(
                    "{}: worker {} gains {} by bidding {}",
                    m.name(),
                    w.id,
                    crate::model::rational_to_string(&report.gain),
                    report.best_bid.map(|b| b.to_string()).unwrap_or_default()
                ));
            }
        }
    }
    out
}

/// Ratio bounds `2 + v_max/v_min` (pooled) and `(2α + 1)·ε·γ` (per requester).
pub fn approximation_bounds(inst: &Instance) -> (Rational, Rational) {
    let co = Rational::from_integer(2.into()) + inst.v_max() / inst.v_min();
    let gamma = care_no::partition_buckets(inst).gamma;
    let alpha = Rational::from_integer(inst.alpha().into());
    let no = (alpha * Rational::from_integer(2.into()) + Rational::from_integer(1.into()))
        * inst.epsilon()
        * Rational::from_integer(gamma.into());
    (co, no)
}

fn check_approx(inst: &Instance) -> Vec<String> {
    let (co_bound, no_bound) = approximation_bounds(inst);
    let mut out = Vec::new();
    match oracle::opt_cooperative(inst) {
        Ok(opt) => {
            let alg = run_care_co(inst).total_reputation;
            if opt.value > &co_bound * &alg {
                out.push(format!(
                    "care-co: OPT {} > ({}) x ALG {}",
                    crate::model::rational_to_string(&opt.value),
                    crate::model::rational_to_string(&co_bound),
                    crate::model::rational_to_string(&alg)
                ));
            }
        }
        Err(e) => out.push(format!("care-co oracle: {}", e)),
    }
    match oracle::opt_noncooperative(inst) {
        Ok(opt) => {
            let alg = care_no::expected_reputation(&bucket_outcomes(inst));
            if opt.value > &no_bound * &alg {
                out.push(format!(
                    "care-no: OPT {} > ({}) x E[ALG] {}",
                    crate::model::rational_to_string(&opt.value),
                    crate::model::rational_to_string(&no_bound),
                    crate::model::rational_to_string(&alg)
                ));
            }
        }
        Err(e) => out.push(format!("care-no oracle: {}", e)),
    }
    out
}

fn check_lemmas(inst: &Instance) -> Vec<String> {
    let mut found = oracle::check_lemma1(inst);
    let mut out = Vec::new();
    for r in [
        oracle::check_lemma2(inst),
        oracle::check_lemma3(inst),
        oracle::check_padding_bound(inst),
    ] {
        match r {
            Ok(v) => found.extend(v),
            Err(e) => out.push(format!("oracle: {}", e)),
        }
    }
    out.extend(found.into_iter().map(|v| format!("{}: {}", v.lemma, v.detail)));
    out
}

/// Violations of `property` on one instance, as readable lines.
pub fn check(property: Property, inst: &Instance) -> Vec<String> {
    match property {
        Property::Ir => check_ir(inst),
        Property::Budget => check_budget(inst),
        Property::Truthful => check_truthful(inst),
        Property::Approx => check_approx(inst),
        Property::Lemmas => check_lemmas(inst),
    }
}

/// Instance for one trial, or `None` when the property needs a valid
/// instance and this one is rejected.
pub fn trial_instance(property: Property, seed: u64, trial: u64) -> Option<Instance> {
    let inst = random_instance(&property.corpus(), trial_seed(seed, trial));
    if property.needs_valid_instance() && validate(&inst).iter().any(|v| !v.is_warning()) {
        return None;
    }
    Some(inst)
}

pub fn verify(property: Property, trials: u64, seed: u64) -> VerifyReport {
    let results: Vec<Option<Counterexample>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            trial_instance(property, seed, t).map(|instance| Counterexample {
                trial: t,
                seed: trial_seed(seed, t),
                details: check(property, &instance),
                instance,
            })
        })
        .collect();
    let checked = results.iter().filter(|r| r.is_some()).count() as u64;
    VerifyReport {
        property,
        trials,
        checked,
        skipped: trials - checked,
        counterexamples: results
            .into_iter()
            .flatten()
            .filter(|c| !c.details.is_empty())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_label() {
        for p in Property::ALL {
            assert_eq!(p.label().parse::<Property>(), Ok(p));
        }
        assert!("nope".parse::<Property>().is_err());
    }

    #[test]
    fn ir_and_budget_hold_on_a_few_trials() {
        for p in [Property::Ir, Property::Budget] {
            let r = verify(p, 20, 7);
            assert_eq!(r.checked, 20);
            assert!(r.counterexamples.is_empty(), "{:?}", r.counterexamples);
        }
    }

    #[test]
    fn trials_are_reproducible() {
        assert_eq!(
            trial_instance(Property::Lemmas, 3, 4),
            trial_instance(Property::Lemmas, 3, 4)
        );
    }
}
