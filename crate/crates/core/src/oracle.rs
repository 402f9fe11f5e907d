//! Monte Carlo and closed-form reference quantities.
//!
//! The population ball divergence is reconstructed from six ball-membership
//! probabilities. With `X1, X2, X3 ~ F`, `Y1, Y2, Y3 ~ G` and `d` the chosen
//! distance:
//!
//! ```text
//! p0 = P{ d(Y1,X1) <= d(X2,X1) }
//! p1 = P{ d(Y1,X1) <= d(X2,X1), d(Y2,X1) <= d(X2,X1) }
//! p2 = P{ d(X1,Y1) <= d(Y2,Y1) }
//! p3 = P{ d(X1,Y1) <= d(Y2,Y1), d(X2,Y1) <= d(Y2,Y1) }
//! p4 = P{ d(X3,X1) <= d(X2,X1), d(Y1,X1) <= d(X2,X1) }
//! p5 = P{ d(Y3,Y1) <= d(Y2,Y1), d(X1,Y1) <= d(Y2,Y1) }
//!
//! Theta^2 = p1 + p3 - 2 p4 - 2 p5 + 2/3
//! E[T]    = (1/6)(1/(n-2) + 1/(m-2)) + (p0 - p1)/m + (p2 - p3)/n + Theta^2
//! ```
//!
//! All six events are evaluated on one shared six-tuple per replicate, so the
//! replicate-level indicator covariance is available and every derived
//! quantity gets a delta-method standard error.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::DataMatrix;
use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::rng::{substream, StreamRng};
use crate::scalar::Real;

/// Deterministic source of `d`-dimensional observations.
pub trait Sampler: Send + Sync {
    fn dim(&self) -> usize;

    /// Family and parameters, for reports.
    fn describe(&self) -> String;

    /// Writes one observation into `out` (`out.len() == self.dim()`).
    fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]);

    fn sample(&self, rng: &mut StreamRng) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.sample_into(rng, &mut v);
        v
    }

    /// `rows` observations drawn sequentially from one stream.
    fn sample_matrix(&self, rows: usize, rng: &mut StreamRng) -> Result<DataMatrix<f64>> {
        let d = self.dim();
        let mut values = vec![0.0; rows * d];
        for row in values.chunks_exact_mut(d) {
            self.sample_into(rng, row);
        }
        DataMatrix::new(rows, d, values)
    }
}

/// A point estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    /// `|value - target|` measured in standard errors.
    pub fn z_from(&self, target: f64) -> f64 {
        (self.value - target) / self.se
    }
}

pub const EVENTS: usize = 6;

/// Estimated `p0..p5` with replicate-level second moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityProfile {
    pub p: [f64; EVENTS],
    pub replicates: u64,
    /// Binomial standard errors `sqrt(p (1 - p) / M)`.
    pub standard_errors: [f64; EVENTS],
    /// `joint[a][b]` = fraction of replicates where events `a` and `b` both occurred.
    pub joint: [[f64; EVENTS]; EVENTS],
}

impl ProbabilityProfile {
    /// Builds a profile from exact probabilities (no sampling error).
    pub fn from_probabilities(p: [f64; EVENTS]) -> Self {
        Self {
            p,
            replicates: 0,
            standard_errors: [0.0; EVENTS],
            joint: [[0.0; EVENTS]; EVENTS],
        }
    }

    fn covariance(&self, a: usize, b: usize) -> f64 {
        self.joint[a][b] - self.p[a] * self.p[b]
    }

    /// Standard error of `sum_a coeffs[a] * p_a`.
    pub fn linear_se(&self, coeffs: &[f64; EVENTS]) -> f64 {
        if self.replicates == 0 {
            return 0.0;
        }
        let mut var = 0.0;
        for a in 0..EVENTS {
            for b in 0..EVENTS {
                var += coeffs[a] * coeffs[b] * self.covariance(a, b);
            }
        }
        (var.max(0.0) / self.replicates as f64).sqrt()
    }

    fn linear(&self, coeffs: &[f64; EVENTS], constant: f64) -> Estimate {
        let value = constant + coeffs.iter().zip(&self.p).map(|(c, p)| c * p).sum::<f64>();
        Estimate {
            value,
            se: self.linear_se(coeffs),
        }
    }
}

const THETA_COEFFS: [f64; EVENTS] = [0.0, 1.0, 0.0, 1.0, -2.0, -2.0];

#[derive(Debug, Default, Clone, Copy)]
struct EventCounts {
    single: [u64; EVENTS],
    joint: [[u64; EVENTS]; EVENTS],
}

impl EventCounts {
    fn add(&mut self, hits: [bool; EVENTS]) {
        for a in 0..EVENTS {
            if hits[a] {
                self.single[a] += 1;
                for (cell, &hit) in self.joint[a].iter_mut().zip(&hits) {
                    *cell += u64::from(hit);
                }
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for a in 0..EVENTS {
            self.single[a] += other.single[a];
            for b in 0..EVENTS {
                self.joint[a][b] += other.joint[a][b];
            }
        }
        self
    }
}

/// Which of the six events occur for one six-tuple.
pub fn profile_events(
    x: [&[f64]; 3],
    y: [&[f64]; 3],
    spec: &DistanceSpec<f64>,
) -> [bool; EVENTS] {
    let d = |a: &[f64], b: &[f64]| spec.eval_unchecked(a, b);
    let [x1, x2, x3] = x;
    let [y1, y2, y3] = y;
    let rx = d(x2, x1);
    let ry = d(y2, y1);
    let e0 = d(y1, x1) <= rx;
    let e2 = d(x1, y1) <= ry;
    [
        e0,
        e0 && d(y2, x1) <= rx,
        e2,
        e2 && d(x2, y1) <= ry,
        e0 && d(x3, x1) <= rx,
        e2 && d(y3, y1) <= ry,
    ]
}

/// Monte Carlo estimate of `p0..p5`. Replicate `k` draws its `F` points from
/// substream `(seed, k, 0)` and its `G` points from `(seed, k, 1)`.
pub fn estimate_probability_profile(
    f: &dyn Sampler,
    g: &dyn Sampler,
    spec: &DistanceSpec<f64>,
    replicates: u64,
    seed: u64,
) -> Result<ProbabilityProfile> {
    if replicates == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    let d = f.dim();
    let counts = (0..replicates)
        .into_par_iter()
        .fold(
            || (EventCounts::default(), vec![0.0; 3 * d], vec![0.0; 3 * d]),
            |(mut acc, mut xs, mut ys), k| {
                let mut rx = substream(seed, &[k, 0]);
                let mut ry = substream(seed, &[k, 1]);
                for row in xs.chunks_exact_mut(d) {
                    f.sample_into(&mut rx, row);
                }
                for row in ys.chunks_exact_mut(d) {
                    g.sample_into(&mut ry, row);
                }
                let x = [&xs[..d], &xs[d..2 * d], &xs[2 * d..]];
                let y = [&ys[..d], &ys[d..2 * d], &ys[2 * d..]];
                acc.add(profile_events(x, y, spec));
                (acc, xs, ys)
            },
        )
        .map(|(acc, _, _)| acc)
        .reduce(EventCounts::default, EventCounts::merge);

    let total = replicates as f64;
    let mut p = [0.0; EVENTS];
    let mut standard_errors = [0.0; EVENTS];
    let mut joint = [[0.0; EVENTS]; EVENTS];
    for a in 0..EVENTS {
        p[a] = counts.single[a] as f64 / total;
        standard_errors[a] = (p[a] * (1.0 - p[a]) / total).sqrt();
        joint[a] = counts.joint[a].map(|c| c as f64 / total);
    }
    Ok(ProbabilityProfile {
        p,
        replicates,
        standard_errors,
        joint,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaEstimate {
    /// Estimate clamped to `[0, 2]`.
    pub value: f64,
    /// Estimate before clamping.
    pub raw: f64,
    pub se: f64,
    pub clamped: bool,
}

/// `p1 + p3 - 2 p4 - 2 p5 + 2/3`, clamped to `[0, 2]`.
pub fn theta_estimate(profile: &ProbabilityProfile) -> ThetaEstimate {
    let est = profile.linear(&THETA_COEFFS, 2.0 / 3.0);
    let value = est.value.clamp(0.0, 2.0);
    ThetaEstimate {
        value,
        raw: est.value,
        se: est.se,
        clamped: value != est.value,
    }
}

/// Two-probability lower bound `(p2 - 1/2)^2 + (p0 - 1/2)^2` on the ball
/// divergence of continuous distributions.
pub fn theta_lower_bound(profile: &ProbabilityProfile) -> Estimate {
    let (a, b) = (profile.p[0] - 0.5, profile.p[2] - 0.5);
    let mut grad = [0.0; EVENTS];
    grad[0] = 2.0 * a;
    grad[2] = 2.0 * b;
    Estimate {
        value: a * a + b * b,
        se: profile.linear_se(&grad),
    }
}

/// Unclamped divergence minus [`theta_lower_bound`], with a standard error
/// that accounts for both sides being computed on the same draws.
pub fn theta_bound_gap(profile: &ProbabilityProfile) -> Estimate {
    let theta = theta_estimate(profile).raw;
    let bound = theta_lower_bound(profile);
    let mut grad = THETA_COEFFS;
    grad[0] -= 2.0 * (profile.p[0] - 0.5);
    grad[2] -= 2.0 * (profile.p[2] - 0.5);
    Estimate {
        value: theta - bound.value,
        se: profile.linear_se(&grad),
    }
}

/// Exact finite-sample mean of the statistic for the given probabilities.
///
/// The divergence term enters unclamped, keeping the expression linear in
/// the profile.
pub fn expected_statistic(n: usize, m: usize, profile: &ProbabilityProfile) -> Result<f64> {
    expected_statistic_estimate(n, m, profile).map(|e| e.value)
}

pub fn expected_statistic_estimate(
    n: usize,
    m: usize,
    profile: &ProbabilityProfile,
) -> Result<Estimate> {
    if n < 3 || m < 3 {
        return Err(Error::SampleTooSmall { n, m, min: 3 });
    }
    let (nf, mf) = (n as f64, m as f64);
    let mut coeffs = THETA_COEFFS;
    coeffs[0] += 1.0 / mf;
    coeffs[1] -= 1.0 / mf;
    coeffs[2] += 1.0 / nf;
    coeffs[3] -= 1.0 / nf;
    let constant = (1.0 / (nf - 2.0) + 1.0 / (mf - 2.0)) / 6.0 + 2.0 / 3.0;
    Ok(profile.linear(&coeffs, constant))
}

/// `(1/sqrt(n) + 1/sqrt(m))^2`; infinite if either size is zero.
pub fn separation_rate(n: usize, m: usize) -> f64 {
    let s = 1.0 / (n as f64).sqrt() + 1.0 / (m as f64).sqrt();
    s * s
}

/// Plug-in energy distance between two samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyEstimate {
    /// `2 h(cross) - h(within_x) - h(within_y)`.
    pub value: f64,
    /// Two-sample jackknife standard error (needs at least 3 rows per sample).
    pub se: Option<f64>,
    /// Mean coordinate-averaged `psi` over all `n m` cross pairs.
    pub cross: f64,
    /// Same over unordered distinct pairs of `x`.
    pub within_x: f64,
    pub within_y: f64,
}

/// Energy distance `2 phi*(F,G) - phi*(F,F) - phi*(G,G)` with `h` applied
/// after averaging `psi` over pairs.
pub fn energy_distance_estimate<S: Real>(
    x: &DataMatrix<S>,
    y: &DataMatrix<S>,
    spec: &DistanceSpec<S>,
) -> Result<EnergyEstimate> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let (n, m) = (x.rows(), y.rows());
    if n < 2 || m < 2 {
        return Err(Error::SampleTooSmall { n, m, min: 2 });
    }
    let psi = |a: &[S], b: &[S]| spec.psi_mean_unchecked(a, b).as_f64();
    let h = |t: f64| spec.h(S::from_f64_lossy(t)).as_f64();

    // Row sums so that every leave-one-out mean is O(1).
    let (cross_x, cross_y) = pair_sums(x, Some(y), &psi);
    let (up_x, down_x) = pair_sums(x, None, &psi);
    let (up_y, down_y) = pair_sums(y, None, &psi);
    let wx: Vec<f64> = up_x.iter().zip(&down_x).map(|(a, b)| a + b).collect();
    let wy: Vec<f64> = up_y.iter().zip(&down_y).map(|(a, b)| a + b).collect();

    let (nf, mf) = (n as f64, m as f64);
    let cross_sum: f64 = cross_x.iter().sum();
    // each unordered pair appears twice in the row sums
    let wx_sum: f64 = wx.iter().sum::<f64>() / 2.0;
    let wy_sum: f64 = wy.iter().sum::<f64>() / 2.0;
    let pairs = |k: f64| k * (k - 1.0) / 2.0;

    let cross = cross_sum / (nf * mf);
    let within_x = wx_sum / pairs(nf);
    let within_y = wy_sum / pairs(mf);
    let value = 2.0 * h(cross) - h(within_x) - h(within_y);

    let se = (n >= 3 && m >= 3).then(|| {
        let loo_x: Vec<f64> = (0..n)
            .map(|i| {
                let c = (cross_sum - cross_x[i]) / ((nf - 1.0) * mf);
                let w = (wx_sum - wx[i]) / pairs(nf - 1.0);
                2.0 * h(c) - h(w) - h(within_y)
            })
            .collect();
        let loo_y: Vec<f64> = (0..m)
            .map(|j| {
                let c = (cross_sum - cross_y[j]) / (nf * (mf - 1.0));
                let w = (wy_sum - wy[j]) / pairs(mf - 1.0);
                2.0 * h(c) - h(within_x) - h(w)
            })
            .collect();
        (jackknife_var(&loo_x) + jackknife_var(&loo_y)).sqrt()
    });

    Ok(EnergyEstimate {
        value,
        se,
        cross,
        within_x,
        within_y,
    })
}

/// Row and column sums of `psi(a_i, b_j)`. With `b = None` the pairs are
/// `j > i` within `a`. Rows are scored in parallel blocks and folded in
/// index order, so the sums do not depend on the thread count.
fn pair_sums<S: Real, P>(a: &DataMatrix<S>, b: Option<&DataMatrix<S>>, psi: &P) -> (Vec<f64>, Vec<f64>)
where
    P: Fn(&[S], &[S]) -> f64 + Sync,
{
    const BLOCK: usize = 32;
    let other = b.unwrap_or(a);
    let first = |i: usize| if b.is_none() { i + 1 } else { 0 };
    let mut rows = vec![0.0; a.rows()];
    let mut cols = vec![0.0; other.rows()];
    for start in (0..a.rows()).step_by(BLOCK) {
        let end = (start + BLOCK).min(a.rows());
        let block: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|i| (first(i)..other.rows()).map(|j| psi(a.row(i), other.row(j))).collect())
            .collect();
        for (i, values) in (start..end).zip(block) {
            rows[i] = values.iter().sum();
            for (j, v) in (first(i)..).zip(values) {
                cols[j] += v;
            }
        }
    }
    (rows, cols)
}

fn jackknife_var(leave_one_out: &[f64]) -> f64 {
    let k = leave_one_out.len() as f64;
    let mean = leave_one_out.iter().sum::<f64>() / k;
    (k - 1.0) / k * leave_one_out.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
}

/// Population energy distance by Monte Carlo: replicate `k` draws `X, X'`
/// from substream `(seed, k, 0)` and `Y, Y'` from `(seed, k, 1)`. The
/// standard error comes from `bootstrap` resamples of the replicates.
pub fn energy_distance_monte_carlo(
    f: &dyn Sampler,
    g: &dyn Sampler,
    spec: &DistanceSpec<f64>,
    replicates: u64,
    bootstrap: usize,
    seed: u64,
) -> Result<Estimate> {
    if replicates < 2 {
        return Err(Error::InvalidParameter("need at least two replicates".into()));
    }
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: g.dim(),
        });
    }
    let d = f.dim();
    let triples: Vec<[f64; 3]> = (0..replicates)
        .into_par_iter()
        .map(|k| {
            let mut rx = substream(seed, &[k, 0]);
            let mut ry = substream(seed, &[k, 1]);
            let (mut x1, mut x2) = (vec![0.0; d], vec![0.0; d]);
            let (mut y1, mut y2) = (vec![0.0; d], vec![0.0; d]);
            f.sample_into(&mut rx, &mut x1);
            f.sample_into(&mut rx, &mut x2);
            g.sample_into(&mut ry, &mut y1);
            g.sample_into(&mut ry, &mut y2);
            let psi = |a: &[f64], b: &[f64]| spec.psi_mean_unchecked(a, b);
            [
                0.5 * (psi(&x1, &y1) + psi(&x2, &y2)),
                psi(&x1, &x2),
                psi(&y1, &y2),
            ]
        })
        .collect();
    let combine = |sums: [f64; 3], count: f64| {
        2.0 * spec.h(sums[0] / count) - spec.h(sums[1] / count) - spec.h(sums[2] / count)
    };
    let sum_of = |idx: &mut dyn Iterator<Item = usize>| {
        idx.fold([0.0; 3], |mut acc, i| {
            for c in 0..3 {
                acc[c] += triples[i][c];
            }
            acc
        })
    };
    let total = triples.len();
    let value = combine(sum_of(&mut (0..total)), total as f64);
    let boots: Vec<f64> = (0..bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, &[u64::MAX, b as u64]);
            let mut draw = (0..total).map(|_| crate::rng::below(&mut rng, total as u32) as usize);
            combine(sum_of(&mut draw), total as f64)
        })
        .collect();
    let se = if boots.len() >= 2 {
        let mean = boots.iter().sum::<f64>() / boots.len() as f64;
        (boots.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (boots.len() - 1) as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(Estimate { value, se })
}
