//! Depth-first enumeration of assignment vectors `x ∈ {0..m}^n` (0 = idle)
//! over exact integers. Each slot tries requesters `1..=m` before idling, and
//! the first optimum found in that order is kept, so among optima the lowest
//! workers are assigned, to the lowest requesters.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use super::OracleError;

/// Values scaled by a common denominator so the search runs on `i128`.
pub(crate) fn scale(values: &[&BigRational]) -> Result<(Vec<i128>, BigInt), OracleError> {
    let denom = values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let limit: BigInt = BigInt::one() << 96usize;
    let scaled = values
        .iter()
        .map(|v| {
            let x = v.numer() * (&denom / v.denom());
            if x.magnitude() >= limit.magnitude() {
                return Err(OracleError::Overflow);
            }
            Ok(x.to_i128().expect("bounded above"))
        })
        .collect::<Result<_, _>>()?;
    Ok((scaled, denom))
}

#[derive(Debug, Clone)]
pub(crate) enum Budget {
    Unlimited,
    Pooled(i128),
    PerRequester(Vec<i128>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Sense {
    Maximise,
    Minimise,
}

#[derive(Debug, Clone)]
pub(crate) struct Problem {
    /// Group index of each slot.
    pub groups: Vec<usize>,
    /// `tau[l][j]`.
    pub tau: Vec<Vec<u64>>,
    pub caps: Vec<u64>,
    pub costs: Vec<i128>,
    pub budget: Budget,
    pub weights: Vec<i128>,
    pub sense: Sense,
    pub cardinality: Option<u64>,
}

/// Best objective and its assignment vector (entry `j + 1` = requester `j`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Best {
    pub score: i128,
    pub choice: Vec<usize>,
}

struct State<'a> {
    p: &'a Problem,
    choice: Vec<usize>,
    per_pair: Vec<Vec<u64>>,
    per_req: Vec<u64>,
    spend: Vec<i128>,
    pooled: i128,
    count: u64,
    score: i128,
    /// `suffix[k]` = sum of positive weights from slot `k` on.
    suffix: Vec<i128>,
    best: Option<Best>,
}

impl Problem {
    pub fn m(&self) -> usize {
        self.caps.len()
    }

    /// Per-slot visiting order: every requester, then idle.
    fn choices(&self) -> Vec<usize> {
        (1..=self.m()).chain(std::iter::once(0)).collect()
    }

    pub fn solve(&self) -> Option<Best> {
        let n = self.groups.len();
        if n == 0 {
            return self.solve_from(Vec::new());
        }
        // one chunk per choice of the first slot; chunk order is lexicographic
        let chunks: Vec<Option<Best>> = self
            .choices()
            .into_par_iter()
            .map(|first| self.solve_from(vec![first]))
            .collect();
        chunks.into_iter().flatten().fold(None, |acc, b| match acc {
            Some(a) if !self.better(b.score, a.score) => Some(a),
            _ => Some(b),
        })
    }

    fn better(&self, a: i128, b: i128) -> bool {
        match self.sense {
            Sense::Maximise => a > b,
            Sense::Minimise => a < b,
        }
    }

    fn solve_from(&self, prefix: Vec<usize>) -> Option<Best> {
        let n = self.groups.len();
        let mut suffix = vec![0i128; n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] + self.weights[k].max(0);
        }
        let mut st = State {
            p: self,
            choice: Vec::with_capacity(n),
            per_pair: vec![vec![0; self.m()]; self.tau.len()],
            per_req: vec![0; self.m()],
            spend: vec![0; self.m()],
            pooled: 0,
            count: 0,
            score: 0,
            suffix,
            best: None,
        };
        for &c in &prefix {
            if !st.push(c) {
                return None;
            }
        }
        st.dfs();
        st.best
    }
}

impl State<'_> {
    fn push(&mut self, c: usize) -> bool {
        let k = self.choice.len();
        if c > 0 {
            let j = c - 1;
            let g = self.p.groups[k];
            if self.per_pair[g][j] >= self.p.tau[g][j] || self.per_req[j] >= self.p.caps[j] {
                return false;
            }
            let cost = self.p.costs[k];
            match &self.p.budget {
                Budget::Unlimited => {}
                Budget::Pooled(b) => {
                    if self.pooled + cost > *b {
                        return false;
                    }
                }
                Budget::PerRequester(b) => {
                    if self.spend[j] + cost > b[j] {
                        return false;
                    }
                }
            }
            if let Some(limit) = self.p.cardinality {
                if self.count >= limit {
                    return false;
                }
            }
            self.per_pair[g][j] += 1;
            self.per_req[j] += 1;
            self.spend[j] += cost;
            self.pooled += cost;
            self.count += 1;
            self.score += self.p.weights[k];
        }
        self.choice.push(c);
        true
    }

    fn pop(&mut self) {
        let k = self.choice.len() - 1;
        let c = self.choice.pop().expect("non-empty");
        if c > 0 {
            let j = c - 1;
            let g = self.p.groups[k];
            let cost = self.p.costs[k];
            self.per_pair[g][j] -= 1;
            self.per_req[j] -= 1;
            self.spend[j] -= cost;
            self.pooled -= cost;
            self.count -= 1;
            self.score -= self.p.weights[k];
        }
    }

    fn dfs(&mut self) {
        let k = self.choice.len();
        let n = self.p.groups.len();
        if k == n {
            if self.p.cardinality.is_some_and(|c| c != self.count) {
                return;
            }
            let improves = match &self.best {
                None => true,
                Some(b) => self.p.better(self.score, b.score),
            };
            if improves {
                self.best = Some(Best {
                    score: self.score,
                    choice: self.choice.clone(),
                });
            }
            return;
        }
        if let Some(limit) = self.p.cardinality {
            if self.count + ((n - k) as u64) < limit {
                return;
            }
        }
        if self.p.sense == Sense::Maximise && self.p.cardinality.is_none() {
            if let Some(b) = &self.best {
                if self.score + self.suffix[k] <= b.score {
                    return;
                }
            }
        }
        for c in self.p.choices() {
            if self.push(c) {
                self.dfs();
                self.pop();
            }
        }
    }
}
