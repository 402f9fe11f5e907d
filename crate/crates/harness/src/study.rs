//! Monte Carlo power and level studies over scenario grids.
//!
//! Seeds: for series label `s`, dimension `d` and repetition `r`, the dataset
//! comes from `derive_seed(master, [hash_str(s), d, r])` and the permutation
//! replicates for distance kind `k` from
//! `derive_seed(master, [hash_str(s), d, r, 1 + k.id()])`. Every kind sees the
//! same dataset, and adding series, dimensions or repetitions never changes
//! the streams of existing ones.

use std::time::Instant;

use balldiv::rng::{derive_seed, hash_str};
use balldiv::scenarios::draw_with;
use balldiv::{permutation_test_indexed, BallIndex, DistanceKind, PermutationPlan};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{GridPoint, StudyConfig};
use crate::error::Result;

/// Aggregated outcome for one (series, dimension, distance kind).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerCurve {
    pub scenario: String,
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub kind: DistanceKind,
    pub reps: usize,
    pub rejections: usize,
    pub power: f64,
    pub se: f64,
    #[serde(rename = "meanP")]
    pub mean_p: f64,
    /// Test time summed over repetitions (not wall-clock when run in parallel).
    pub seconds: f64,
}

impl PowerCurve {
    pub fn from_outcomes(
        scenario: &str,
        (d, n, m): (usize, usize, usize),
        kind: DistanceKind,
        p_values: &[f64],
        alpha: f64,
        seconds: f64,
    ) -> Self {
        let reps = p_values.len();
        let rejections = p_values.iter().filter(|&&p| p < alpha).count();
        let power = rejections as f64 / reps as f64;
        Self {
            scenario: scenario.to_string(),
            d,
            n,
            m,
            kind,
            reps,
            rejections,
            power,
            se: (power * (1.0 - power) / reps as f64).sqrt(),
            mean_p: p_values.iter().sum::<f64>() / reps as f64,
            seconds,
        }
    }
}

/// Seed of the dataset for repetition `rep` of a grid point.
pub fn dataset_seed(master: u64, label: &str, d: usize, rep: usize) -> u64 {
    derive_seed(master, &[hash_str(label), d as u64, rep as u64])
}

/// Seed of the permutation replicates for one test.
pub fn permutation_seed(master: u64, label: &str, d: usize, rep: usize, kind: DistanceKind) -> u64 {
    derive_seed(master, &[hash_str(label), d as u64, rep as u64, 1 + kind.id()])
}

/// Per-kind p-values and seconds of one repetition.
type RepOutcome = Vec<(f64, f64)>;

fn run_point(config: &StudyConfig, point: &GridPoint) -> Result<Vec<PowerCurve>> {
    let spec = &point.spec;
    let outcomes: Vec<RepOutcome> = (0..config.reps)
        .into_par_iter()
        .map(|rep| -> Result<RepOutcome> {
            let seed = dataset_seed(config.master_seed, &point.label, spec.d, rep);
            let pooled = draw_with(&point.f, &point.g, spec.n, spec.m, seed)?;
            config
                .kinds
                .iter()
                .map(|&kind| {
                    let start = Instant::now();
                    let index = BallIndex::build(&pooled, &kind.spec())?;
                    let plan = PermutationPlan::random(
                        config.permutations,
                        permutation_seed(config.master_seed, &point.label, spec.d, rep, kind),
                    );
                    let result = permutation_test_indexed(&index, plan, config.alpha)?;
                    Ok((result.p_value, start.elapsed().as_secs_f64()))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(config
        .kinds
        .iter()
        .enumerate()
        .map(|(k, &kind)| {
            let p: Vec<f64> = outcomes.iter().map(|o| o[k].0).collect();
            let seconds = outcomes.iter().map(|o| o[k].1).sum();
            PowerCurve::from_outcomes(&point.label, (spec.d, spec.n, spec.m), kind, &p, config.alpha, seconds)
        })
        .collect())
}

/// Runs every grid point. `progress` is called after each point with its rows.
pub fn run_power_study_with(
    config: &StudyConfig,
    mut progress: impl FnMut(&[PowerCurve]),
) -> Result<Vec<PowerCurve>> {
    let points = config.grid_points()?;
    let mut curves = Vec::new();
    for point in &points {
        let rows = run_point(config, point)?;
        progress(&rows);
        curves.extend(rows);
    }
    Ok(curves)
}

pub fn run_power_study(config: &StudyConfig) -> Result<Vec<PowerCurve>> {
    run_power_study_with(config, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::GridEntry;

    #[test]
    fn aggregates_follow_definitions() {
        let c = PowerCurve::from_outcomes("s", (4, 10, 12), DistanceKind::L1, &[0.01, 0.2, 0.04, 0.5], 0.05, 1.5);
        assert_eq!(c.rejections, 2);
        assert_eq!(c.power, 0.5);
        assert_eq!(c.se, (0.25f64 / 4.0).sqrt());
        assert!((c.mean_p - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn seeds_separate_kinds_and_reps() {
        let a = permutation_seed(1, "ex1", 4, 0, DistanceKind::L2);
        assert_ne!(a, permutation_seed(1, "ex1", 4, 0, DistanceKind::L1));
        assert_ne!(a, permutation_seed(1, "ex1", 4, 1, DistanceKind::L2));
        assert_ne!(dataset_seed(1, "ex1", 4, 0), dataset_seed(1, "ex1", 8, 0));
        assert_ne!(dataset_seed(1, "ex1", 4, 0), dataset_seed(1, "ex2", 4, 0));
    }

    #[test]
    fn small_study_is_deterministic() {
        let mut config = StudyConfig::new(vec![GridEntry::new("ex1").dims(&[2, 8])]);
        config.reps = 12;
        config.permutations = 49;
        config.kinds = vec![DistanceKind::L2, DistanceKind::Exp];
        let a = run_power_study(&config).unwrap();
        let b = run_power_study(&config).unwrap();
        assert_eq!(a.len(), 4);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((x.rejections, x.mean_p), (y.rejections, y.mean_p));
        }
        assert_eq!((a[0].d, a[0].kind, a[3].d, a[3].kind), (2, DistanceKind::L2, 8, DistanceKind::Exp));
    }
}
