//! Non-cooperative mechanism: workers are bucketed by normalised reputation
//! `ρ_i = v_i / v_min` into bands `(ε^{h-1}, ε^h]`, PEA runs on each bucket
//! with every requester's full budget, and one bucket is realised uniformly
//! at random.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{rational_serde, Instance, Outcome, Rational};
use crate::pea;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BucketPartition {
    /// `γ = max(1, ⌈log_ε ρ_max⌉)`.
    pub gamma: usize,
    /// `buckets[h - 1]` = worker indices of `D_h`, ascending.
    pub buckets: Vec<Vec<usize>>,
}

/// Smallest `h ≥ 1` with `ρ ≤ ε^h`, by exact repeated multiplication.
fn band(rho: &Rational, epsilon: &Rational) -> usize {
    let mut h = 1;
    let mut power = epsilon.clone();
    while *rho > power {
        power *= epsilon;
        h += 1;
    }
    h
}

pub fn partition_buckets(inst: &Instance) -> BucketPartition {
    let bands: Vec<usize> = (0..inst.n())
        .map(|i| band(&inst.virtual_reputation(i), inst.epsilon()))
        .collect();
    let gamma = bands.iter().copied().max().unwrap_or(1).max(1);
    let mut buckets = vec![Vec::new(); gamma];
    for (i, h) in bands.into_iter().enumerate() {
        buckets[h - 1].push(i);
    }
    BucketPartition { gamma, buckets }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoMode {
    /// Realise one bucket, drawn from the seed.
    Sampled { seed: u64 },
    /// Return every bucket's outcome and the expected reputation.
    Expectation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeDistribution {
    pub gamma: usize,
    #[serde(skip)]
    pub per_bucket: Vec<Outcome>,
    /// `(1/γ) · Σ_h Σ_{i ∈ winners(D_h)} v_i`.
    #[serde(with = "rational_serde")]
    pub expected_reputation: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum CareNoOutput {
    Sampled {
        gamma: usize,
        bucket: usize,
        outcome: Outcome,
    },
    Expectation(OutcomeDistribution),
}

impl CareNoOutput {
    pub fn gamma(&self) -> usize {
        match self {
            CareNoOutput::Sampled { gamma, .. } => *gamma,
            CareNoOutput::Expectation(d) => d.gamma,
        }
    }
}

/// Bucket (1-based) realised for `seed` among `gamma` equally likely ones.
pub fn sample_bucket(seed: u64, gamma: usize) -> usize {
    rng::stream(seed, rng::STREAM_CARE_NO).gen_range(0..gamma) + 1
}

fn run_bucket(inst: &Instance, partition: &BucketPartition, h: usize) -> Outcome {
    let mut outcome = pea::run_pea(inst, &partition.buckets[h - 1]);
    outcome.diagnostics.bucket = Some(h);
    outcome
}

/// Runs PEA on every bucket (in parallel).
pub fn bucket_outcomes(inst: &Instance) -> (BucketPartition, Vec<Outcome>) {
    let partition = partition_buckets(inst);
    let outcomes = (1..=partition.gamma)
        .into_par_iter()
        .map(|h| run_bucket(inst, &partition, h))
        .collect();
    (partition, outcomes)
}

pub fn expected_reputation(outcomes: &[Outcome]) -> Rational {
    let gamma = Rational::from_integer(outcomes.len().into());
    outcomes
        .iter()
        .map(|o| o.total_reputation.clone())
        .fold(Rational::from_integer(0.into()), |a, b| a + b)
        / gamma
}

pub fn run_care_no(inst: &Instance, mode: NoMode) -> CareNoOutput {
    match mode {
        NoMode::Sampled { seed } => {
            let partition = partition_buckets(inst);
            let bucket = sample_bucket(seed, partition.gamma);
            CareNoOutput::Sampled {
                gamma: partition.gamma,
                bucket,
                outcome: run_bucket(inst, &partition, bucket),
            }
        }
        NoMode::Expectation => {
            let (partition, per_bucket) = bucket_outcomes(inst);
            CareNoOutput::Expectation(OutcomeDistribution {
                gamma: partition.gamma,
                expected_reputation: expected_reputation(&per_bucket),
                per_bucket,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::instance;
    use crate::model::WorkerId;

    #[test]
    fn interval_membership() {
        let inst = instance(
            &[
                ("1", "1", 1),
                ("1", "5", 1),
                ("1", "10", 1),
                ("1", "11", 1),
                ("1", "100", 1),
            ],
            &["40"],
            vec![vec![5]],
        );
        let p = partition_buckets(&inst);
        assert_eq!(p.gamma, 2);
        assert_eq!(p.buckets, vec![vec![0, 1, 2], vec![3, 4]]);
    }

    #[test]
    fn equal_reputations_make_one_bucket() {
        let inst = instance(&[("1", "3", 1), ("2", "3", 1)], &["40"], vec![vec![2]]);
        let p = partition_buckets(&inst);
        assert_eq!(p.gamma, 1);
        assert_eq!(p.buckets, vec![vec![0, 1]]);
    }

    #[test]
    fn upper_boundary_is_closed() {
        // v_min = 2, so ρ = (1, 100) with ε = 10
        let inst = instance(&[("1", "2", 1), ("1", "200", 1)], &["40"], vec![vec![2]]);
        let p = partition_buckets(&inst);
        assert_eq!(p.gamma, 2);
        assert_eq!(p.buckets, vec![vec![0], vec![1]]);
    }

    #[test]
    fn single_bucket_matches_pea() {
        let inst = instance(
            &[("1", "1", 1), ("1", "1", 1), ("3", "1", 1)],
            &["4", "4"],
            vec![vec![1, 1]],
        );
        match run_care_no(&inst, NoMode::Sampled { seed: 9 }) {
            CareNoOutput::Sampled { gamma, bucket, outcome } => {
                assert_eq!((gamma, bucket), (1, 1));
                let mut direct = pea::run_pea(&inst, &[0, 1, 2]);
                direct.diagnostics.bucket = Some(1);
                assert_eq!(outcome, direct);
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn expectation_is_the_bucket_mean() {
        let inst = instance(&[("1", "1", 1), ("1", "20", 2)], &["4"], vec![vec![1], vec![1]]);
        let CareNoOutput::Expectation(d) = run_care_no(&inst, NoMode::Expectation) else {
            panic!()
        };
        assert_eq!(d.gamma, 2);
        let sum = &d.per_bucket[0].total_reputation + &d.per_bucket[1].total_reputation;
        assert_eq!(d.expected_reputation, sum / Rational::from_integer(2.into()));
        assert_eq!(d.per_bucket[1].winners(), vec![WorkerId(2)]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let inst = instance(&[("1", "1", 1), ("1", "20", 2)], &["4"], vec![vec![1], vec![1]]);
        let a = run_care_no(&inst, NoMode::Sampled { seed: 42 });
        let b = run_care_no(&inst, NoMode::Sampled { seed: 42 });
        assert_eq!(a, b);
    }
}
