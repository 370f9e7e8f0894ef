use serde::Serialize;

use super::instance::{GroupId, Instance, RequesterId, WorkerId};
use super::money::Money;

/// Machine-readable invariant violation. Violations are data: validation and
/// outcome checks return them instead of failing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code")]
pub enum Violation {
    BidExceedsAllBudgets {
        worker: WorkerId,
        bid: Money,
        max_budget: Money,
    },
    TauClamped {
        group: GroupId,
        requester: RequesterId,
        declared: u64,
        clamped_to: u64,
    },
    UnknownWorker {
        worker: WorkerId,
    },
    UnknownRequester {
        requester: RequesterId,
    },
    CompatibilityExceeded {
        group: GroupId,
        requester: RequesterId,
        assigned: u64,
        tau: u64,
    },
    PaymentWithoutAssignment {
        worker: WorkerId,
    },
    PaymentFromWrongRequester {
        worker: WorkerId,
    },
    ReputationMismatch,
    IndividualRationality {
        worker: WorkerId,
        payment: Money,
        bid: Money,
    },
    PooledBudgetExceeded {
        paid: Money,
        budget: Money,
    },
    RequesterBudgetExceeded {
        requester: RequesterId,
        spent: Money,
        budget: Money,
    },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::BidExceedsAllBudgets { .. } => "BidExceedsAllBudgets",
            Violation::TauClamped { .. } => "TauClamped",
            Violation::UnknownWorker { .. } => "UnknownWorker",
            Violation::UnknownRequester { .. } => "UnknownRequester",
            Violation::CompatibilityExceeded { .. } => "CompatibilityExceeded",
            Violation::PaymentWithoutAssignment { .. } => "PaymentWithoutAssignment",
            Violation::PaymentFromWrongRequester { .. } => "PaymentFromWrongRequester",
            Violation::ReputationMismatch => "ReputationMismatch",
            Violation::IndividualRationality { .. } => "IndividualRationality",
            Violation::PooledBudgetExceeded { .. } => "PooledBudgetExceeded",
            Violation::RequesterBudgetExceeded { .. } => "RequesterBudgetExceeded",
        }
    }

    /// Warnings do not make an instance unusable.
    pub fn is_warning(&self) -> bool {
        matches!(self, Violation::TauClamped { .. })
    }
}

/// Instance-level checks beyond the structural ones enforced at construction:
/// every bid must be affordable by at least one requester, and clamped
/// thresholds are reported as warnings.
pub fn validate(inst: &Instance) -> Vec<Violation> {
    let max_budget = inst.max_budget();
    let mut out: Vec<Violation> = inst
        .workers()
        .iter()
        .filter(|w| w.bid > *max_budget)
        .map(|w| Violation::BidExceedsAllBudgets {
            worker: w.id,
            bid: w.bid.clone(),
            max_budget: max_budget.clone(),
        })
        .collect();
    out.extend(inst.tau_clamps().iter().map(|c| Violation::TauClamped {
        group: c.group,
        requester: c.requester,
        declared: c.declared,
        clamped_to: c.clamped_to,
    }));
    out
}
