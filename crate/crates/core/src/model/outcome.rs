use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use super::instance::{Instance, RequesterId, WorkerId};
use super::money::{Money, Rational};
use super::validate::Violation;

/// Sparse `x_ij`: worker → requester, at most one requester per worker.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Assignment {
    entries: BTreeMap<WorkerId, RequesterId>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Panics if the worker is already assigned; solvers never do that.
    pub fn assign(&mut self, worker: WorkerId, requester: RequesterId) {
        let prev = self.entries.insert(worker, requester);
        assert!(prev.is_none(), "worker {} assigned twice", worker);
    }

    pub fn requester_of(&self, worker: WorkerId) -> Option<RequesterId> {
        self.entries.get(&worker).copied()
    }

    pub fn contains(&self, worker: WorkerId) -> bool {
        self.entries.contains_key(&worker)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (WorkerId, RequesterId)> + '_ {
        self.entries.iter().map(|(w, r)| (*w, *r))
    }

    pub fn workers(&self) -> impl Iterator<Item = WorkerId> + '_ {
        self.entries.keys().copied()
    }

    pub fn total_reputation(&self, inst: &Instance) -> Rational {
        self.workers()
            .map(|w| inst.worker(w.index()).reputation.clone())
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// Compatibility violations. Runs in `O(|entries| + L·m)`.
    pub fn check(&self, inst: &Instance) -> Vec<Violation> {
        let m = inst.m();
        let mut counts = vec![0u64; inst.num_groups() * m];
        let mut out = Vec::new();
        for (w, r) in self.iter() {
            if w.0 == 0 || w.index() >= inst.n() {
                out.push(Violation::UnknownWorker { worker: w });
                continue;
            }
            if r.0 == 0 || r.index() >= m {
                out.push(Violation::UnknownRequester { requester: r });
                continue;
            }
            let g = inst.worker(w.index()).group.index();
            counts[g * m + r.index()] += 1;
        }
        for g in 0..inst.num_groups() {
            for j in 0..m {
                let c = counts[g * m + j];
                let t = inst.tau().get(g, j);
                if c > t {
                    out.push(Violation::CompatibilityExceeded {
                        group: super::GroupId::from_index(g),
                        requester: RequesterId::from_index(j),
                        assigned: c,
                        tau: t,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Payment {
    pub requester: RequesterId,
    pub amount: Money,
}

/// Per-run diagnostics. Fields not meaningful for a mechanism stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    /// CARE-CO key worker (last worker passing the budget test).
    pub key_worker: Option<WorkerId>,
    /// 1-based position of the key worker in cost-effectiveness order.
    pub key_position: Option<usize>,
    /// CARE-CO price per unit of reputation.
    #[serde(serialize_with = "opt_rational")]
    pub unit_price: Option<Rational>,
    #[serde(serialize_with = "opt_rational")]
    pub orp_key: Option<Rational>,
    #[serde(serialize_with = "opt_rational")]
    pub orp_next: Option<Rational>,
    /// PEA critical price r*.
    pub critical_price: Option<Money>,
    /// CARE-NO bucket (1-based) this outcome came from.
    pub bucket: Option<usize>,
    pub requester_spend: BTreeMap<RequesterId, Money>,
    pub flags: Vec<String>,
}

fn opt_rational<S: serde::Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&super::money::rational_to_string(r)),
        None => s.serialize_none(),
    }
}

pub const NO_CRITICAL_PRICE: &str = "no_critical_price";
pub const NO_KEY_WORKER: &str = "no_key_worker";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub assignment: Assignment,
    pub payments: BTreeMap<WorkerId, Payment>,
    pub total_reputation: Rational,
    pub diagnostics: Diagnostics,
}

impl Outcome {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds an outcome where each assigned worker is paid by its requester.
    pub fn from_parts(inst: &Instance, assignment: Assignment, amounts: BTreeMap<WorkerId, Money>) -> Self {
        let mut payments = BTreeMap::new();
        let mut spend: BTreeMap<RequesterId, Money> = BTreeMap::new();
        for (w, amount) in amounts {
            let requester = assignment
                .requester_of(w)
                .unwrap_or_else(|| panic!("payment for unassigned worker {}", w));
            *spend.entry(requester).or_insert_with(Money::zero) += &amount;
            payments.insert(w, Payment { requester, amount });
        }
        let total_reputation = assignment.total_reputation(inst);
        Outcome {
            assignment,
            payments,
            total_reputation,
            diagnostics: Diagnostics {
                requester_spend: spend,
                ..Diagnostics::default()
            },
        }
    }

    pub fn winners(&self) -> Vec<WorkerId> {
        self.assignment.workers().collect()
    }

    pub fn payment_of(&self, worker: WorkerId) -> Option<&Money> {
        self.payments.get(&worker).map(|p| &p.amount)
    }

    pub fn total_paid(&self) -> Money {
        self.payments.values().map(|p| &p.amount).sum()
    }

    pub fn spend_of(&self, requester: RequesterId) -> Money {
        self.payments
            .values()
            .filter(|p| p.requester == requester)
            .map(|p| &p.amount)
            .sum()
    }

    pub fn max_requester_spend(&self) -> Money {
        let mut per: BTreeMap<RequesterId, Money> = BTreeMap::new();
        for p in self.payments.values() {
            *per.entry(p.requester).or_insert_with(Money::zero) += &p.amount;
        }
        per.into_values().max().unwrap_or_else(Money::zero)
    }

    /// Structural checks: assignment invariants, payments only for assigned
    /// workers and from their requester, reputation total recomputed.
    pub fn check(&self, inst: &Instance) -> Vec<Violation> {
        let mut out = self.assignment.check(inst);
        for (w, p) in &self.payments {
            match self.assignment.requester_of(*w) {
                None => out.push(Violation::PaymentWithoutAssignment { worker: *w }),
                Some(r) if r != p.requester => out.push(Violation::PaymentFromWrongRequester { worker: *w }),
                _ => {}
            }
        }
        if self.assignment.total_reputation(inst) != self.total_reputation {
            out.push(Violation::ReputationMismatch);
        }
        out
    }

    /// `p_i ≥ b_i` for every winner (missing payment counts as zero).
    pub fn check_individual_rationality(&self, inst: &Instance) -> Vec<Violation> {
        self.assignment
            .workers()
            .filter_map(|w| {
                let paid = self.payment_of(w).cloned().unwrap_or_else(Money::zero);
                let bid = &inst.worker(w.index()).bid;
                (paid < *bid).then(|| Violation::IndividualRationality {
                    worker: w,
                    payment: paid,
                    bid: bid.clone(),
                })
            })
            .collect()
    }

    /// Cooperative rule: `Σ p_i ≤ Σ B_j`.
    pub fn check_pooled_budget(&self, inst: &Instance) -> Vec<Violation> {
        let paid = self.total_paid();
        let budget = inst.total_budget();
        if paid > budget {
            vec![Violation::PooledBudgetExceeded { paid, budget }]
        } else {
            vec![]
        }
    }

    /// Non-cooperative rule: `Σ_i p_ij ≤ B_j` for every requester.
    pub fn check_requester_budgets(&self, inst: &Instance) -> Vec<Violation> {
        inst.requesters()
            .iter()
            .filter_map(|r| {
                let spent = self.spend_of(r.id);
                (spent > r.budget).then(|| Violation::RequesterBudgetExceeded {
                    requester: r.id,
                    spent,
                    budget: r.budget.clone(),
                })
            })
            .collect()
    }
}
