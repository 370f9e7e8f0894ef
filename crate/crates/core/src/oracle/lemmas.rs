//! Executable forms of the structural lemmas behind PEA and CARE-CO. Every
//! `M_f` and `M(S)` below comes from enumeration, not from the flow solvers.

use serde::Serialize;

use super::{ip_enumerate_with, EnumerationBounds, IpConstraints, IpObjective, OracleError};
use crate::care_co;
use crate::model::{Instance, Money, Rational, WorkerId};
use crate::pea;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaViolation {
    pub lemma: &'static str,
    pub detail: String,
}

fn violation(lemma: &'static str, detail: String) -> LemmaViolation {
    LemmaViolation { lemma, detail }
}

const BOUNDS: EnumerationBounds = EnumerationBounds {
    max_workers: 10,
    max_requesters: 4,
};

/// `M_f(r)` over `workers ∩ S(r)` by enumeration.
fn max_selected(inst: &Instance, workers: &[usize], r: &Money) -> Result<u64, OracleError> {
    let c = IpConstraints {
        workers: workers.iter().copied().filter(|&w| inst.worker(w).bid <= *r).collect(),
        caps: pea::requester_caps(r, &inst.budgets()),
    };
    Ok(ip_enumerate_with(inst, IpObjective::MaxCardinality, &c, BOUNDS)?
        .assignment
        .len() as u64)
}

fn all(inst: &Instance) -> Vec<usize> {
    (0..inst.n()).collect()
}

/// A winner that lowers its bid stays a winner as long as the critical
/// price does not move.
pub fn check_lemma1(inst: &Instance) -> Vec<LemmaViolation> {
    let workers = all(inst);
    let (Some(critical), _) = pea::critical_price(inst, &workers) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for id in pea::pea_winners(inst, &workers) {
        let i = id.index();
        let bid = inst.worker(i).bid.clone();
        let mut lower: Vec<Money> = inst
            .workers()
            .iter()
            .map(|w| w.bid.clone())
            .filter(|b| *b < bid)
            .collect();
        lower.push(Money::zero());
        lower.push(bid.scale(&Rational::new(1.into(), 2.into())));
        lower.sort();
        lower.dedup();
        for b in lower {
            let next = inst.with_bid(i, b.clone());
            if pea::critical_price(&next, &workers).0.as_ref() != Some(&critical) {
                continue;
            }
            if !pea::pea_winners(&next, &workers).contains(&id) {
                out.push(violation(
                    "lemma1",
                    format!(
                        "worker {} loses after lowering its bid from {} to {} at r* = {}",
                        id, bid, b, critical
                    ),
                ));
            }
        }
    }
    out
}

/// Among virtual prices `r ≥ r*` with `E(r) = M_f(r)`, `M_f` strictly
/// decreases as `r` grows.
pub fn check_lemma2(inst: &Instance) -> Result<Vec<LemmaViolation>, OracleError> {
    let workers = all(inst);
    let (Some(critical), _) = pea::critical_price(inst, &workers) else {
        return Ok(Vec::new());
    };
    let budgets = inst.budgets();
    let mut qualifying: Vec<(Money, u64)> = Vec::new();
    for r in pea::virtual_prices(&budgets, inst.n()).descending().iter().rev() {
        if *r < critical {
            continue;
        }
        let mf = max_selected(inst, &workers, r)?;
        if pea::employability(r, &budgets) == mf {
            qualifying.push((r.clone(), mf));
        }
    }
    Ok(qualifying
        .windows(2)
        .filter(|w| w[1].1 >= w[0].1)
        .map(|w| {
            violation(
                "lemma2",
                format!("M_f({}) = {} but M_f({}) = {}", w[0].0, w[0].1, w[1].0, w[1].1),
            )
        })
        .collect())
}

/// Removing one available worker lowers `M_f(r)` by at most one, at every
/// virtual price.
pub fn check_lemma3(inst: &Instance) -> Result<Vec<LemmaViolation>, OracleError> {
    let workers = all(inst);
    let mut out = Vec::new();
    for r in pea::virtual_prices(&inst.budgets(), inst.n()).descending() {
        let mf = max_selected(inst, &workers, r)?;
        for &s in &workers {
            if inst.worker(s).bid > *r {
                continue;
            }
            let rest: Vec<usize> = workers.iter().copied().filter(|&w| w != s).collect();
            let without = max_selected(inst, &rest, r)?;
            if without + 1 < mf {
                out.push(violation(
                    "lemma3",
                    format!(
                        "removing worker {} drops M_f({}) from {} to {}",
                        WorkerId::from_index(s),
                        r,
                        mf,
                        without
                    ),
                ));
            }
        }
    }
    Ok(out)
}

/// `M(S_{k+1}) − M(S_k) ≤ v_{k+1}` for the CARE-CO key worker.
pub fn check_padding_bound(inst: &Instance) -> Result<Vec<LemmaViolation>, OracleError> {
    let run = care_co::analyze_care_co(inst);
    if run.key >= inst.n() {
        return Ok(Vec::new());
    }
    let value = |prefix: usize| -> Result<Rational, OracleError> {
        let c = IpConstraints {
            workers: run.order.as_slice()[..prefix].to_vec(),
            caps: vec![inst.n() as u64; inst.m()],
        };
        Ok(ip_enumerate_with(inst, IpObjective::MaxReputation, &c, BOUNDS)?.value)
    };
    let at_key = value(run.key)?;
    let next = value(run.key + 1)?;
    let v = &inst.worker(run.order.at(run.key + 1)).reputation;
    if &next - &at_key > *v {
        return Ok(vec![violation(
            "padding",
            format!("M(S_k+1) - M(S_k) = {} exceeds v_k+1 = {}", &next - &at_key, v),
        )]);
    }
    Ok(Vec::new())
}
