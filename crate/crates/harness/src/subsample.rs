//! Power on a real dataset by repeated proportional sub-sampling.
//!
//! For pooled size `s`, repetition `r` draws group-0 rows from substream
//! `(seed, s, r, 0)`, group-1 rows from `(seed, s, r, 1)`, and the permutation
//! replicates for kind `k` from `(seed, s, r, 2 + k.id())`.

use std::time::Instant;

use balldiv::rng::{derive_seed, partial_shuffle, substream};
use balldiv::{permutation_test, DataMatrix, DistanceKind, PermutationPlan, PooledSample, MIN_GROUP_SIZE};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::LabeledData;
use crate::study::PowerCurve;

#[derive(Debug, Clone)]
pub struct SubsampleStudy {
    /// Name written in the `scenario` column.
    pub name: String,
    pub data: LabeledData,
    /// Pooled sub-sample sizes.
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub alpha: f64,
    pub permutations: usize,
    pub kinds: Vec<DistanceKind>,
    pub seed: u64,
}

/// Splits a pooled size between two groups in proportion to their sizes.
///
/// Rounds to the nearest integer, a half going to the larger group, then
/// lifts either side to at least 3.
pub fn allocate(first: usize, second: usize, pooled: usize) -> Result<(usize, usize)> {
    if pooled < 2 * MIN_GROUP_SIZE {
        return Err(Error::Subsample(format!(
            "pooled size {pooled} cannot give both groups {MIN_GROUP_SIZE} rows"
        )));
    }
    let total = first + second;
    if total == 0 {
        return Err(Error::Subsample("both groups are empty".into()));
    }
    let num = pooled * first;
    let (q, r) = (num / total, num % total);
    let mut a = if 2 * r > total || (2 * r == total && first >= second) { q + 1 } else { q };
    a = a.clamp(MIN_GROUP_SIZE, pooled - MIN_GROUP_SIZE);
    let b = pooled - a;
    if a > first || b > second {
        return Err(Error::Subsample(format!(
            "pooled size {pooled} needs {a} + {b} rows but the groups have {first} and {second}"
        )));
    }
    Ok((a, b))
}

/// `k` rows of `mat`; all rows in their original order when `k` is everything.
fn pick_rows(mat: &DataMatrix<f64>, k: usize, seed: u64) -> Result<DataMatrix<f64>> {
    if k == mat.rows() {
        return Ok(mat.clone());
    }
    let mut idx: Vec<usize> = (0..mat.rows()).collect();
    partial_shuffle(&mut idx, k, &mut substream(seed, &[]));
    Ok(mat.select_rows(&idx[..k])?)
}

pub fn run_subsample_study(study: &SubsampleStudy) -> Result<Vec<PowerCurve>> {
    if study.reps == 0 || study.permutations == 0 || study.kinds.is_empty() || study.sizes.is_empty() {
        return Err(Error::Config(
            "sub-sampling needs reps, permutations, kinds and sizes to be non-empty".into(),
        ));
    }
    let [g0, g1] = &study.data.groups;
    let plans: Vec<(usize, (usize, usize))> = study
        .sizes
        .iter()
        .map(|&s| allocate(g0.rows(), g1.rows(), s).map(|ab| (s, ab)))
        .collect::<Result<_>>()?;

    let mut curves = Vec::new();
    for (size, (a, b)) in plans {
        let outcomes: Vec<Vec<(f64, f64)>> = (0..study.reps)
            .into_par_iter()
            .map(|rep| -> Result<Vec<(f64, f64)>> {
                let path = |tag: u64| derive_seed(study.seed, &[size as u64, rep as u64, tag]);
                let pooled = PooledSample::new(pick_rows(g0, a, path(0))?, pick_rows(g1, b, path(1))?)?;
                study
                    .kinds
                    .iter()
                    .map(|&kind| {
                        let start = Instant::now();
                        let plan = PermutationPlan::random(study.permutations, path(2 + kind.id()));
                        let result = permutation_test(&pooled, &kind.spec(), plan, study.alpha)?;
                        Ok((result.p_value, start.elapsed().as_secs_f64()))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (k, &kind) in study.kinds.iter().enumerate() {
            let p: Vec<f64> = outcomes.iter().map(|o| o[k].0).collect();
            let seconds = outcomes.iter().map(|o| o[k].1).sum();
            curves.push(PowerCurve::from_outcomes(
                &study.name,
                (study.data.dim(), a, b),
                kind,
                &p,
                study.alpha,
                seconds,
            ));
        }
    }
    Ok(curves)
}
