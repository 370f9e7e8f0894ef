//! Domain types shared by every mechanism: exact money, workers, requesters,
//! compatibility thresholds, assignments and outcomes.

mod instance;
mod json;
mod money;
mod outcome;
mod validate;

use thiserror::Error;

pub use instance::{
    default_epsilon, CompatibilityMatrix, GroupId, Instance, Requester, RequesterId, TauClamp, Worker, WorkerId,
};
pub use json::{instance_from_value, instance_to_value, parse_instance, serialize_instance};
pub use money::{parse_rational_str, rational_serde, rational_to_string, Money, MoneyError, Rational};
pub use outcome::{Assignment, Diagnostics, Outcome, Payment, NO_CRITICAL_PRICE, NO_KEY_WORKER};
pub use validate::{validate, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ModelError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Convenience builder for hand-written instances (tests, examples, docs).
/// Worker and requester ids are assigned in insertion order.
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    workers: Vec<Worker>,
    requesters: Vec<Requester>,
    tau: Vec<Vec<u64>>,
    epsilon: Rational,
    seed: u64,
}

impl Default for InstanceBuilder {
    fn default() -> Self {
        InstanceBuilder {
            workers: Vec::new(),
            requesters: Vec::new(),
            tau: Vec::new(),
            epsilon: default_epsilon(),
            seed: 0,
        }
    }
}

impl InstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a truthful worker (cost = bid). Panics on malformed numbers.
    pub fn worker(mut self, group: u32, bid: &str, reputation: &str) -> Self {
        let bid: Money = bid.parse().expect("bid");
        let id = WorkerId::from_index(self.workers.len());
        self.workers.push(Worker {
            id,
            group: GroupId(group),
            cost: Some(bid.clone()),
            bid,
            reputation: parse_rational_str(reputation).expect("reputation"),
        });
        self
    }

    /// Adds a worker whose reported bid differs from its true cost.
    pub fn strategic_worker(mut self, group: u32, cost: &str, bid: &str, reputation: &str) -> Self {
        let id = WorkerId::from_index(self.workers.len());
        self.workers.push(Worker {
            id,
            group: GroupId(group),
            cost: Some(cost.parse().expect("cost")),
            bid: bid.parse().expect("bid"),
            reputation: parse_rational_str(reputation).expect("reputation"),
        });
        self
    }

    pub fn requester(mut self, budget: &str) -> Self {
        let id = RequesterId::from_index(self.requesters.len());
        self.requesters.push(Requester {
            id,
            budget: budget.parse().expect("budget"),
        });
        self
    }

    pub fn tau(mut self, rows: Vec<Vec<u64>>) -> Self {
        self.tau = rows;
        self
    }

    pub fn epsilon(mut self, epsilon: &str) -> Self {
        self.epsilon = parse_rational_str(epsilon).expect("epsilon");
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn build(self) -> Result<Instance, ModelError> {
        Instance::new(
            self.workers,
            self.requesters,
            CompatibilityMatrix::new(self.tau),
            self.epsilon,
            self.seed,
        )
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;

    /// `(bid, reputation, group)` triples, budgets, tau rows.
    pub fn instance(workers: &[(&str, &str, u32)], budgets: &[&str], tau: Vec<Vec<u64>>) -> Instance {
        let mut b = InstanceBuilder::new().tau(tau);
        for (bid, rep, g) in workers {
            b = b.worker(*g, bid, rep);
        }
        for budget in budgets {
            b = b.requester(budget);
        }
        b.build().expect("valid test instance")
    }
}
