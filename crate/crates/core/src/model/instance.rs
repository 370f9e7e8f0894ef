use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::money::{Money, Rational};
use super::ModelError;

macro_rules! one_based_id {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            pub fn from_index(index: usize) -> Self {
                $name(index as u32 + 1)
            }

            pub fn index(self) -> usize {
                self.0 as usize - 1
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

one_based_id!(
    /// Worker identifier, `1..=n`. Also the canonical tie-break key.
    WorkerId
);
one_based_id!(
    /// Requester identifier, `1..=m`; column index into the compatibility matrix.
    RequesterId
);
one_based_id!(
    /// Group identifier, `1..=L`; row index into the compatibility matrix.
    GroupId
);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Worker {
    pub id: WorkerId,
    pub group: GroupId,
    /// Private true cost. Absent in bid-only files, where it defaults to the bid.
    pub cost: Option<Money>,
    pub bid: Money,
    pub reputation: Rational,
}

impl Worker {
    pub fn true_cost(&self) -> &Money {
        self.cost.as_ref().unwrap_or(&self.bid)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Requester {
    pub id: RequesterId,
    pub budget: Money,
}

/// `tau[l][j]`: how many workers of group `l` requester `j` may employ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityMatrix {
    rows: Vec<Vec<u64>>,
}

impl CompatibilityMatrix {
    pub fn new(rows: Vec<Vec<u64>>) -> Self {
        CompatibilityMatrix { rows }
    }

    pub fn groups(&self) -> usize {
        self.rows.len()
    }

    pub fn requesters(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn get(&self, group: usize, requester: usize) -> u64 {
        self.rows[group][requester]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }
}

/// Raised (and fixed) while building an instance: a threshold above the group size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauClamp {
    pub group: GroupId,
    pub requester: RequesterId,
    pub declared: u64,
    pub clamped_to: u64,
}

/// Complete auction input. Immutable once built; every constructor path
/// validates the structural invariants.
#[derive(Debug, Clone)]
pub struct Instance {
    workers: Vec<Worker>,
    requesters: Vec<Requester>,
    tau: CompatibilityMatrix,
    epsilon: Rational,
    seed: u64,
    groups: Vec<Vec<usize>>,
    clamps: Vec<TauClamp>,
    v_min: Rational,
    v_max: Rational,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.workers == other.workers
            && self.requesters == other.requesters
            && self.tau == other.tau
            && self.epsilon == other.epsilon
            && self.seed == other.seed
    }
}

impl Eq for Instance {}

pub fn default_epsilon() -> Rational {
    BigRational::from_integer(BigInt::from(10))
}

impl Instance {
    /// Builds an instance. Workers and requesters may be given in any order but
    /// their ids must be exactly `1..=n` and `1..=m`; `tau` must be `L × m`.
    /// Thresholds above the group size are clamped and recorded.
    pub fn new(
        mut workers: Vec<Worker>,
        mut requesters: Vec<Requester>,
        tau: CompatibilityMatrix,
        epsilon: Rational,
        seed: u64,
    ) -> Result<Self, ModelError> {
        if workers.is_empty() {
            return Err(ModelError::invalid("$.workers", "at least one worker is required"));
        }
        if requesters.is_empty() {
            return Err(ModelError::invalid(
                "$.requesters",
                "at least one requester is required",
            ));
        }
        if tau.groups() == 0 {
            return Err(ModelError::invalid("$.tau", "at least one group row is required"));
        }
        if epsilon <= BigRational::one() {
            return Err(ModelError::invalid("$.epsilon", "epsilon must exceed 1"));
        }
        workers.sort_by_key(|w| w.id);
        requesters.sort_by_key(|r| r.id);
        for (k, pair) in workers.windows(2).enumerate() {
            if pair[0].id == pair[1].id {
                return Err(ModelError::invalid(
                    format!("$.workers[{}].id", k + 1),
                    format!("duplicate worker id {}", pair[0].id),
                ));
            }
        }
        for (k, w) in workers.iter().enumerate() {
            if w.id != WorkerId::from_index(k) {
                return Err(ModelError::invalid(
                    format!("$.workers[{}].id", k),
                    format!("worker ids must be 1..={} without gaps", workers.len()),
                ));
            }
            if !w.reputation.is_positive() {
                return Err(ModelError::invalid(
                    format!("$.workers[{}].reputation", k),
                    "reputation must be positive",
                ));
            }
            if w.group.0 == 0 || w.group.index() >= tau.groups() {
                return Err(ModelError::invalid(
                    format!("$.workers[{}].group", k),
                    format!("group {} does not exist (L = {})", w.group, tau.groups()),
                ));
            }
        }
        for (k, pair) in requesters.windows(2).enumerate() {
            if pair[0].id == pair[1].id {
                return Err(ModelError::invalid(
                    format!("$.requesters[{}].id", k + 1),
                    format!("duplicate requester id {}", pair[0].id),
                ));
            }
        }
        for (k, r) in requesters.iter().enumerate() {
            if r.id != RequesterId::from_index(k) {
                return Err(ModelError::invalid(
                    format!("$.requesters[{}].id", k),
                    format!("requester ids must be 1..={} without gaps", requesters.len()),
                ));
            }
            if r.budget.is_zero() {
                return Err(ModelError::invalid(
                    format!("$.requesters[{}].budget", k),
                    "budget must be positive",
                ));
            }
        }
        let m = requesters.len();
        for (l, row) in tau.rows().iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::invalid(
                    format!("$.tau[{}]", l),
                    format!("expected {} entries (one per requester), found {}", m, row.len()),
                ));
            }
        }

        let mut groups = vec![Vec::new(); tau.groups()];
        for (k, w) in workers.iter().enumerate() {
            groups[w.group.index()].push(k);
        }
        let mut clamps = Vec::new();
        let mut rows = tau.rows;
        for (l, row) in rows.iter_mut().enumerate() {
            let size = groups[l].len() as u64;
            for (j, t) in row.iter_mut().enumerate() {
                if *t > size {
                    log::warn!(
                        "tau[{}][{}] = {} exceeds |G_{}| = {}; clamped",
                        l + 1,
                        j + 1,
                        t,
                        l + 1,
                        size
                    );
                    clamps.push(TauClamp {
                        group: GroupId::from_index(l),
                        requester: RequesterId::from_index(j),
                        declared: *t,
                        clamped_to: size,
                    });
                    *t = size;
                }
            }
        }
        let v_min = workers
            .iter()
            .map(|w| &w.reputation)
            .min()
            .cloned()
            .unwrap_or_else(Zero::zero);
        let v_max = workers
            .iter()
            .map(|w| &w.reputation)
            .max()
            .cloned()
            .unwrap_or_else(Zero::zero);
        Ok(Instance {
            workers,
            requesters,
            tau: CompatibilityMatrix::new(rows),
            epsilon,
            seed,
            groups,
            clamps,
            v_min,
            v_max,
        })
    }

    pub fn workers(&self) -> &[Worker] {
        &self.workers
    }

    pub fn worker(&self, index: usize) -> &Worker {
        &self.workers[index]
    }

    pub fn requesters(&self) -> &[Requester] {
        &self.requesters
    }

    pub fn tau(&self) -> &CompatibilityMatrix {
        &self.tau
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.workers.len()
    }

    pub fn m(&self) -> usize {
        self.requesters.len()
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    /// Worker indices of each group, ascending.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn tau_clamps(&self) -> &[TauClamp] {
        &self.clamps
    }

    pub fn budgets(&self) -> Vec<Money> {
        self.requesters.iter().map(|r| r.budget.clone()).collect()
    }

    /// Pooled budget `B = Σ B_j`.
    pub fn total_budget(&self) -> Money {
        self.requesters.iter().map(|r| &r.budget).sum()
    }

    pub fn max_budget(&self) -> &Money {
        self.requesters.iter().map(|r| &r.budget).max().expect("m >= 1")
    }

    pub fn v_min(&self) -> &Rational {
        &self.v_min
    }

    pub fn v_max(&self) -> &Rational {
        &self.v_max
    }

    /// `ρ_i = v_i / v_min`.
    pub fn virtual_reputation(&self, index: usize) -> Rational {
        &self.workers[index].reputation / &self.v_min
    }

    /// `α = min{m, max_{l,j} ⌈|G_l| / τ_lj⌉}`; a zero threshold on a non-empty
    /// group counts as unbounded.
    pub fn alpha(&self) -> u64 {
        let m = self.m() as u64;
        let mut worst = 0u64;
        for (l, members) in self.groups.iter().enumerate() {
            let size = members.len() as u64;
            for j in 0..self.m() {
                let t = self.tau.get(l, j);
                let ratio = if size == 0 {
                    0
                } else if t == 0 {
                    u64::MAX
                } else {
                    size.div_ceil(t)
                };
                worst = worst.max(ratio);
            }
        }
        worst.min(m)
    }

    /// Copy with one worker's reported bid replaced. The true cost is kept
    /// (defaulting to the old bid when absent).
    pub fn with_bid(&self, index: usize, bid: Money) -> Instance {
        let mut next = self.clone();
        let w = &mut next.workers[index];
        if w.cost.is_none() {
            w.cost = Some(w.bid.clone());
        }
        w.bid = bid;
        next
    }

    pub fn with_budgets(&self, budgets: &[Money]) -> Instance {
        assert_eq!(budgets.len(), self.m());
        let mut next = self.clone();
        for (r, b) in next.requesters.iter_mut().zip(budgets) {
            r.budget = b.clone();
        }
        next
    }

    pub fn with_epsilon(&self, epsilon: Rational) -> Instance {
        assert!(epsilon > BigRational::one());
        let mut next = self.clone();
        next.epsilon = epsilon;
        next
    }
}
