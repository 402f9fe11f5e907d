//! Permutation inference for the ball statistic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Labeling, PooledSample};
use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::rng::{shuffle, substream};
use crate::scalar::Real;
use crate::statistic::{
    ball_statistic_fast, exact_parts, ordering_key, BallIndex, ExactParts, Scratch, StatisticValue,
};

pub const DEFAULT_REPLICATES: usize = 500;
pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 100_000;

/// How relabelings are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PermutationPlan {
    /// `replicates` uniform random splits; split `k` uses substream `(seed, k)`.
    Random { replicates: usize, seed: u64 },
    /// Every `n`-subset of the pooled sample, in lexicographic order.
    Exhaustive { max_combinations: u64 },
}

impl PermutationPlan {
    pub fn random(replicates: usize, seed: u64) -> Self {
        Self::Random { replicates, seed }
    }

    pub fn exhaustive() -> Self {
        Self::Exhaustive {
            max_combinations: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub observed: StatisticValue,
    /// Replicate statistics in replicate order (lexicographic subset order when exhaustive).
    pub replicates: Vec<f64>,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    /// Smallest replicate value whose empirical CDF reaches `1 - alpha`.
    pub cutoff_estimate: f64,
    pub seed: Option<u64>,
    /// Number of replicates (`C(N, n)` when exhaustive).
    pub b: usize,
    pub exhaustive: bool,
}

/// `C(total, k)`, saturating at `u128::MAX`.
pub fn binomial(total: usize, k: usize) -> u128 {
    if k > total {
        return 0;
    }
    let k = k.min(total - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (total - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((total - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Lexicographic enumeration of `k`-subsets of `0..total` as label vectors
/// (label 0 on the subset).
pub fn enumerate_labelings(total: usize, k: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    if k > total {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut labels = vec![1u8; total];
        for &i in &idx {
            labels[i] = 0;
        }
        out.push(labels);
        // advance to the next combination
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] < total - k + pos {
                break;
            }
        }
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Builds the index once and runs the test on the identity split.
pub fn permutation_test<S: Real>(
    pooled: &PooledSample<S>,
    spec: &DistanceSpec<S>,
    plan: PermutationPlan,
    alpha: f64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    if let PermutationPlan::Random { replicates: 0, .. } = plan {
        return Err(Error::InvalidParameter("need at least one permutation replicate".into()));
    }
    let index = BallIndex::build(pooled, spec)?;
    permutation_test_indexed(&index, plan, alpha)
}

pub fn permutation_test_indexed<S: Real>(
    index: &BallIndex<S>,
    plan: PermutationPlan,
    alpha: f64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    let (n, m) = (index.n(), index.m());
    let total = index.total();
    let evaluate = |labels: &[u8], scratch: &mut Scratch| {
        let exact = exact_parts(index, labels, scratch);
        (ordering_key(n, m, exact), exact)
    };
    let identity = Labeling::identity(n, m);
    let (obs_key, obs_exact) = evaluate(identity.labels(), &mut Scratch::default());
    let observed = ball_statistic_fast(index, &identity)?;
    debug_assert_eq!(observed.exact, Some(obs_exact));

    let (scored, seed, exhaustive): (Vec<(u128, f64)>, Option<u64>, bool) = match plan {
        PermutationPlan::Random { replicates, seed } => {
            if replicates == 0 {
                return Err(Error::InvalidParameter("need at least one permutation replicate".into()));
            }
            let scored = (0..replicates)
                .into_par_iter()
                .map_init(
                    || (Scratch::default(), identity.labels().to_vec()),
                    |(scratch, labels), k| {
                        labels[..n].fill(0);
                        labels[n..].fill(1);
                        shuffle(labels, &mut substream(seed, &[k as u64]));
                        let (key, exact) = evaluate(labels, scratch);
                        (key, value_of(n, m, exact))
                    },
                )
                .collect();
            (scored, Some(seed), false)
        }
        PermutationPlan::Exhaustive { max_combinations } => {
            let count = binomial(total, n);
            if count > u128::from(max_combinations) {
                return Err(Error::TooManyCombinations {
                    count,
                    cap: max_combinations,
                });
            }
            let all = enumerate_labelings(total, n);
            let scored = all
                .par_iter()
                .map_init(Scratch::default, |scratch, labels| {
                    let (key, exact) = evaluate(labels, scratch);
                    (key, value_of(n, m, exact))
                })
                .collect();
            (scored, None, true)
        }
    };

    let b = scored.len();
    let at_least = scored.iter().filter(|(key, _)| *key >= obs_key).count();
    let p_value = if exhaustive {
        at_least as f64 / b as f64
    } else {
        (1 + at_least) as f64 / (b + 1) as f64
    };
    let replicates: Vec<f64> = scored.into_iter().map(|(_, t)| t).collect();
    Ok(TestResult {
        observed,
        cutoff_estimate: empirical_quantile(&replicates, 1.0 - alpha),
        replicates,
        p_value,
        alpha,
        reject: p_value < alpha,
        seed,
        b,
        exhaustive,
    })
}

fn value_of(n: usize, m: usize, exact: ExactParts) -> f64 {
    StatisticValue::from_exact(n, m, exact).t
}

/// Smallest sample value `t` with empirical CDF `F(t) >= level`.
pub fn empirical_quantile(values: &[f64], level: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let b = sorted.len();
    // the epsilon absorbs representation error in level * b, e.g. 0.95 * 500
    let k = ((level * b as f64) - 1e-9).ceil().clamp(1.0, b as f64) as usize;
    sorted[k - 1]
}

/// Upper bound `2 / (3 alpha (min(n, m) - 2))` on the permutation cutoff.
pub fn cutoff_upper_bound(alpha: f64, n: usize, m: usize) -> Result<f64> {
    check_alpha(alpha)?;
    let small = n.min(m);
    if small <= 2 {
        return Err(Error::SampleTooSmall { n, m, min: 3 });
    }
    Ok(2.0 / (3.0 * alpha * (small as f64 - 2.0)))
}

/// Mean of the statistic over uniformly random relabelings of a fixed pooled
/// sample without distance ties: `(1/6)(1/n + 1/m + 1/(n-2) + 1/(m-2))`.
pub fn perm_conditional_expectation(n: usize, m: usize) -> Result<f64> {
    if n < 3 || m < 3 {
        return Err(Error::SampleTooSmall { n, m, min: 3 });
    }
    let group = |k: usize| 1.0 / k as f64 + 1.0 / (k as f64 - 2.0);
    // sum in a fixed order so the result is symmetric in (n, m) to the bit
    Ok((group(n.min(m)) + group(n.max(m))) / 6.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataMatrix;
    use crate::distance::DistanceKind;

    fn pooled_1d(x: &[f64], y: &[f64]) -> PooledSample<f64> {
        let xr: Vec<[f64; 1]> = x.iter().map(|&v| [v]).collect();
        let yr: Vec<[f64; 1]> = y.iter().map(|&v| [v]).collect();
        PooledSample::new(
            DataMatrix::from_rows(&xr).unwrap(),
            DataMatrix::from_rows(&yr).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn bound_examples() {
        assert!((cutoff_upper_bound(0.05, 50, 50).unwrap() - 0.277_777_777_8).abs() < 1e-9);
        assert!((cutoff_upper_bound(0.05, 42, 42).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((cutoff_upper_bound(1.0 / 3.0, 5, 9).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(cutoff_upper_bound(0.05, 2, 9).is_err());
        assert!(cutoff_upper_bound(1.5, 5, 9).is_err());
    }

    #[test]
    fn conditional_expectation_examples() {
        assert!((perm_conditional_expectation(4, 4).unwrap() - 0.25).abs() < 1e-15);
        assert!((perm_conditional_expectation(3, 3).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(
            perm_conditional_expectation(5, 11).unwrap(),
            perm_conditional_expectation(11, 5).unwrap()
        );
        assert!(perm_conditional_expectation(2, 5).is_err());
    }

    #[test]
    fn binomials_and_enumeration() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(10, 4), 210);
        assert_eq!(binomial(3, 5), 0);
        let all = enumerate_labelings(5, 2);
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 0, 1, 1, 1]);
        assert_eq!(all[1], vec![0, 1, 0, 1, 1]);
        assert_eq!(all[9], vec![1, 1, 1, 0, 0]);
    }

    #[test]
    fn quantile_convention() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.95), 19.0);
        assert_eq!(empirical_quantile(&v, 0.9), 18.0);
        assert_eq!(empirical_quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = pooled_1d(&[0.0, 1.0, 3.0], &[4.0, 7.0, 9.0]);
        let spec = DistanceKind::L2.spec();
        assert!(permutation_test(&p, &spec, PermutationPlan::random(0, 1), 0.05).is_err());
        assert!(permutation_test(&p, &spec, PermutationPlan::random(10, 1), 0.0).is_err());
        let big = pooled_1d(&(0..15).map(f64::from).collect::<Vec<_>>(), &(0..15).map(f64::from).collect::<Vec<_>>());
        assert!(matches!(
            permutation_test(&big, &spec, PermutationPlan::exhaustive(), 0.05),
            Err(Error::TooManyCombinations { .. })
        ));
    }

    #[test]
    fn unique_maximum_in_exhaustive_mode() {
        // n != m so the label-swapped split is not a competitor for the maximum.
        let p = pooled_1d(&[0.0, 1.0, 3.0], &[100.0, 101.5, 103.2, 107.0]);
        let res = permutation_test(&p, &DistanceKind::L2.spec(), PermutationPlan::exhaustive(), 0.05).unwrap();
        assert_eq!(res.b, 35);
        assert!(res.replicates.iter().filter(|&&t| t >= res.observed.t).count() == 1);
        assert!((res.p_value - 1.0 / 35.0).abs() < 1e-15);
        assert!(res.reject);
    }

    #[test]
    fn balanced_maximum_is_shared_with_swapped_split() {
        let p = pooled_1d(&[0.0, 1.0, 3.0], &[100.0, 101.5, 103.2]);
        let res = permutation_test(&p, &DistanceKind::L2.spec(), PermutationPlan::exhaustive(), 0.05).unwrap();
        assert_eq!(res.b, 20);
        assert!((res.p_value - 2.0 / 20.0).abs() < 1e-15);
        assert!(!res.reject);
    }

    #[test]
    fn extreme_observed_gives_minimal_random_p() {
        let x: Vec<f64> = (0..8).map(|i| i as f64 * 0.37).collect();
        let y: Vec<f64> = (0..9).map(|i| 1000.0 + i as f64 * 0.41).collect();
        let p = pooled_1d(&x, &y);
        let res = permutation_test(&p, &DistanceKind::L2.spec(), PermutationPlan::random(499, 3), 0.05).unwrap();
        assert!(res.replicates.iter().all(|&t| t < res.observed.t));
        assert!((res.p_value - 0.002).abs() < 1e-15);
        assert_eq!(res.seed, Some(3));
        assert_eq!(res.b, 499);
    }

    #[test]
    fn random_mode_is_deterministic() {
        let x: Vec<f64> = (0..6).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..7).map(|i| (i as f64).cos()).collect();
        let p = pooled_1d(&x, &y);
        let spec = DistanceKind::Exp.spec();
        let a = permutation_test(&p, &spec, PermutationPlan::random(200, 9), 0.1).unwrap();
        let b = permutation_test(&p, &spec, PermutationPlan::random(200, 9), 0.1).unwrap();
        assert_eq!(a, b);
        let c = permutation_test(&p, &spec, PermutationPlan::random(200, 10), 0.1).unwrap();
        assert_ne!(a.replicates, c.replicates);
    }
}
