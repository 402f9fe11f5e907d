//! The ball-divergence two-sample statistic.
//!
//! For a labeling of the pooled sample into groups of sizes `n` (label 0) and
//! `m` (label 1), the statistic is `T = V1 + V2` with
//!
//! ```text
//! V1 = 1/(n(n-1)) sum_{i != j in X} ( #{k in X \ {i,j} : d(k,i) <= d(j,i)} / (n-2)
//!                                    - #{l in Y : d(l,i) <= d(j,i)} / m )^2
//! V2 = 1/(m(m-1)) sum_{i != j in Y} ( #{k in X : d(k,i) <= d(j,i)} / n
//!                                    - #{l in Y \ {i,j} : d(l,i) <= d(j,i)} / (m-2) )^2
//! ```
//!
//! [`BallIndex`] sorts every center's neighbours once. A relabeling then costs
//! one prefix count per center, `O(N^2)` in total. Scaling each inner
//! difference by `m(n-2)` (resp. `n(m-2)`) makes it an integer, so the sums of
//! squares are accumulated exactly and the result does not depend on
//! summation order or thread count.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{Labeling, PooledSample};
use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest pooled sample the exact accumulators are sized for.
pub const MAX_POOLED: usize = 10_000;

/// Pooled pairwise distances and per-center neighbour orderings.
#[derive(Debug, Clone)]
pub struct BallIndex<S> {
    n: usize,
    m: usize,
    dist: Vec<S>,
    /// Row `i`: the other `N-1` indices by ascending `(dist(i, .), index)`.
    order: Vec<u32>,
    /// Row `i`, position `p`: tie-inclusive prefix length of `order[i][p]`.
    rank_along: Vec<u32>,
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n < 3 || m < 3 {
        return Err(Error::SampleTooSmall { n, m, min: 3 });
    }
    if n + m > MAX_POOLED {
        return Err(Error::PooledTooLarge(n + m));
    }
    Ok(())
}

impl<S: Real> BallIndex<S> {
    pub fn build(pooled: &PooledSample<S>, spec: &DistanceSpec<S>) -> Result<Self> {
        let (n, m) = (pooled.n(), pooled.m());
        check_sizes(n, m)?;
        let total = n + m;
        let upper: Vec<Vec<S>> = (0..total)
            .into_par_iter()
            .map(|i| {
                let a = pooled.point(i);
                ((i + 1)..total)
                    .map(|j| spec.eval_unchecked(a, pooled.point(j)))
                    .collect()
            })
            .collect();
        let mut dist = vec![S::zero(); total * total];
        for (i, row) in upper.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < S::zero() {
                    return Err(Error::InvalidDistance(v.as_f64()));
                }
                let j = i + 1 + off;
                dist[i * total + j] = v;
                dist[j * total + i] = v;
            }
        }
        Ok(Self::from_checked(n, m, dist))
    }

    /// Index over a precomputed `N x N` distance matrix (row-major).
    pub fn from_distances(n: usize, m: usize, dist: Vec<S>) -> Result<Self> {
        check_sizes(n, m)?;
        let total = n + m;
        if dist.len() != total * total {
            return Err(Error::ShapeMismatch {
                rows: total,
                dim: total,
                len: dist.len(),
            });
        }
        for i in 0..total {
            if dist[i * total + i] != S::zero() {
                return Err(Error::InvalidParameter(format!(
                    "distance matrix diagonal entry {i} is not zero"
                )));
            }
            for j in 0..i {
                let v = dist[i * total + j];
                if !v.is_finite() || v < S::zero() {
                    return Err(Error::InvalidDistance(v.as_f64()));
                }
                if v != dist[j * total + i] {
                    return Err(Error::InvalidParameter(format!(
                        "distance matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_checked(n, m, dist))
    }

    fn from_checked(n: usize, m: usize, dist: Vec<S>) -> Self {
        let total = n + m;
        let width = total - 1;
        let rows: Vec<(Vec<u32>, Vec<u32>)> = (0..total)
            .into_par_iter()
            .map(|i| {
                let row = &dist[i * total..(i + 1) * total];
                let mut ord: Vec<u32> = (0..total as u32).filter(|&j| j as usize != i).collect();
                ord.sort_unstable_by(|&a, &b| {
                    row[a as usize]
                        .partial_cmp(&row[b as usize])
                        .expect("distances are finite")
                        .then(a.cmp(&b))
                });
                let mut rank = vec![0u32; width];
                for p in (0..width).rev() {
                    rank[p] = if p + 1 < width && row[ord[p + 1] as usize] == row[ord[p] as usize] {
                        rank[p + 1]
                    } else {
                        (p + 1) as u32
                    };
                }
                (ord, rank)
            })
            .collect();
        let mut order = Vec::with_capacity(total * width);
        let mut rank_along = Vec::with_capacity(total * width);
        for (o, r) in rows {
            order.extend(o);
            rank_along.extend(r);
        }
        Self {
            n,
            m,
            dist,
            order,
            rank_along,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn total(&self) -> usize {
        self.n + self.m
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> S {
        self.dist[i * self.total() + j]
    }

    pub fn distances(&self) -> &[S] {
        &self.dist
    }

    /// Neighbours of center `i`, nearest first.
    pub fn order(&self, i: usize) -> &[u32] {
        let w = self.total() - 1;
        &self.order[i * w..(i + 1) * w]
    }

    fn rank_along(&self, i: usize) -> &[u32] {
        let w = self.total() - 1;
        &self.rank_along[i * w..(i + 1) * w]
    }

    /// Number of points `u != i` with `dist(u, i) <= dist(j, i)`.
    pub fn tie_rank(&self, i: usize, j: usize) -> usize {
        assert_ne!(i, j, "tie rank is defined for j != i");
        let r = self.dist(i, j);
        self.order(i)
            .partition_point(|&u| self.dist(i, u as usize) <= r)
    }

    /// Applies `g` to every distance. For strictly increasing `g` the
    /// orderings, and therefore every statistic value, are unchanged.
    pub fn map_distances(&self, g: impl Fn(S) -> S) -> Result<Self> {
        Self::from_distances(self.n, self.m, self.dist.iter().map(|&v| g(v)).collect())
    }
}

/// Exact numerators of `V1` and `V2`.
///
/// `V1 = s1 / (n (n-1) (n-2)^2 m^2)` and `V2 = s2 / (m (m-1) (m-2)^2 n^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExactParts {
    pub s1: u128,
    pub s2: u128,
}

/// Value of the statistic for one labeling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatisticValue {
    /// `v1 + v2`.
    pub t: f64,
    /// Term over pairs from the first sample.
    pub v1: f64,
    /// Term over pairs from the second sample.
    pub v2: f64,
    /// Exact numerators, present when computed by the fast path.
    #[serde(skip)]
    pub exact: Option<ExactParts>,
}

impl StatisticValue {
    pub(crate) fn from_exact(n: usize, m: usize, exact: ExactParts) -> Self {
        let (nf, mf) = (n as f64, m as f64);
        let d1 = nf * (nf - 1.0) * (nf - 2.0) * (nf - 2.0) * mf * mf;
        let d2 = mf * (mf - 1.0) * (mf - 2.0) * (mf - 2.0) * nf * nf;
        let v1 = exact.s1 as f64 / d1;
        let v2 = exact.s2 as f64 / d2;
        Self {
            t: v1 + v2,
            v1,
            v2,
            exact: Some(exact),
        }
    }
}

/// Totally ordered integer proportional to `T` for fixed `(n, m)`.
///
/// Two labelings with equal group sizes compare exactly through this key.
pub fn ordering_key(n: usize, m: usize, exact: ExactParts) -> u128 {
    let (n, m) = (n as u128, m as u128);
    let d1 = m * (n - 1) * (n - 2) * (n - 2);
    let d2 = n * (m - 1) * (m - 2) * (m - 2);
    exact.s1 * d2 + exact.s2 * d1
}

/// Scratch space for [`ball_statistic_fast_with`].
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    prefix: Vec<u32>,
}

/// Fast `O(N^2)` evaluation through the index.
pub fn ball_statistic_fast<S: Real>(index: &BallIndex<S>, labels: &Labeling) -> Result<StatisticValue> {
    ball_statistic_fast_with(index, labels, &mut Scratch::default())
}

pub fn ball_statistic_fast_with<S: Real>(
    index: &BallIndex<S>,
    labels: &Labeling,
    scratch: &mut Scratch,
) -> Result<StatisticValue> {
    let (n, m) = (index.n(), index.m());
    if labels.len() != index.total() {
        return Err(Error::DimensionMismatch {
            expected: index.total(),
            found: labels.len(),
        });
    }
    labels.check_counts(n, m)?;
    let exact = exact_parts(index, labels.labels(), scratch);
    Ok(StatisticValue::from_exact(n, m, exact))
}

/// Fast path without label validation; `labels` must hold `n` zeros and `m` ones.
pub(crate) fn exact_parts<S: Real>(index: &BallIndex<S>, labels: &[u8], scratch: &mut Scratch) -> ExactParts {
    let (n, m) = (index.n() as i64, index.m() as i64);
    let total = index.total();
    let prefix = &mut scratch.prefix;
    prefix.clear();
    prefix.resize(total, 0);

    let (mut s1, mut s2) = (0u128, 0u128);
    for i in 0..total {
        let order = index.order(i);
        let ranks = index.rank_along(i);
        // prefix[r] = number of label-0 points among the r nearest neighbours.
        let mut cx = 0u32;
        for (p, &u) in order.iter().enumerate() {
            cx += u32::from(labels[u as usize] == 0);
            prefix[p + 1] = cx;
        }
        let own = labels[i];
        let mut acc = 0u128;
        if own == 0 {
            for (&j, &r) in order.iter().zip(ranks) {
                if labels[j as usize] == 0 {
                    let cx = i64::from(prefix[r as usize]);
                    let diff = (cx - 1) * m - (i64::from(r) - cx) * (n - 2);
                    acc += (diff * diff) as u128;
                }
            }
            s1 += acc;
        } else {
            for (&j, &r) in order.iter().zip(ranks) {
                if labels[j as usize] == 1 {
                    let cx = i64::from(prefix[r as usize]);
                    let diff = cx * (m - 2) - (i64::from(r) - cx - 1) * n;
                    acc += (diff * diff) as u128;
                }
            }
            s2 += acc;
        }
    }
    ExactParts { s1, s2 }
}

/// Direct triple loop over the defining sums, comparing raw distances.
pub fn ball_statistic_naive<S: Real>(index: &BallIndex<S>, labels: &Labeling) -> Result<StatisticValue> {
    let (n, m) = (index.n(), index.m());
    if labels.len() != index.total() {
        return Err(Error::DimensionMismatch {
            expected: index.total(),
            found: labels.len(),
        });
    }
    labels.check_counts(n, m)?;
    let lab = labels.labels();
    let xs: Vec<usize> = (0..lab.len()).filter(|&i| lab[i] == 0).collect();
    let ys: Vec<usize> = (0..lab.len()).filter(|&i| lab[i] == 1).collect();
    let (nf, mf) = (n as f64, m as f64);

    let within = |centers: &[usize], others: &[usize], own_den: f64, other_den: f64, own_first: bool| {
        let mut sum = 0.0f64;
        for &i in centers {
            for &j in centers {
                if i == j {
                    continue;
                }
                let radius = index.dist(j, i);
                let own = centers
                    .iter()
                    .filter(|&&k| k != i && k != j && index.dist(k, i) <= radius)
                    .count() as f64;
                let other = others.iter().filter(|&&l| index.dist(l, i) <= radius).count() as f64;
                let diff = if own_first {
                    own / own_den - other / other_den
                } else {
                    other / other_den - own / own_den
                };
                sum += diff * diff;
            }
        }
        sum
    };
    let v1 = within(&xs, &ys, nf - 2.0, mf, true) / (nf * (nf - 1.0));
    let v2 = within(&ys, &xs, mf - 2.0, nf, false) / (mf * (mf - 1.0));
    Ok(StatisticValue {
        t: v1 + v2,
        v1,
        v2,
        exact: None,
    })
}

/// Convenience: build the index and evaluate the observed split.
pub fn observed_statistic<S: Real>(pooled: &PooledSample<S>, spec: &DistanceSpec<S>) -> Result<StatisticValue> {
    let index = BallIndex::build(pooled, spec)?;
    ball_statistic_fast(&index, &Labeling::identity(pooled.n(), pooled.m()))
}
