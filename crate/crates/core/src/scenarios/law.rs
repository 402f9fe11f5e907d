//! Distribution descriptors and their samplers.
//!
//! A [`LawSpec`] describes a distribution for every dimension `d`; resolving
//! it at a concrete `d` gives a [`Law`], which implements [`Sampler`].

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::Sampler;
use crate::rng::{open01, StreamRng};

/// `floor(x)` that tolerates `powf` landing one ulp under an integer.
pub(crate) fn floor_tolerant(x: f64) -> usize {
    (x + 1e-9 * x.abs().max(1.0)).floor().max(0.0) as usize
}

/// Distribution of one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Marginal {
    /// `N(mean * d^mean_dim_power, var)`.
    Normal {
        mean: f64,
        var: f64,
        #[serde(default, skip_serializing_if = "is_zero")]
        mean_dim_power: f64,
    },
    Cauchy { location: f64, scale: f64 },
    /// Standard Student t with integer degrees of freedom.
    StudentT { dof: u32 },
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl Marginal {
    pub fn normal(mean: f64, var: f64) -> Self {
        Self::Normal {
            mean,
            var,
            mean_dim_power: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Normal { mean, var, mean_dim_power } => {
                mean.is_finite() && var.is_finite() && var >= 0.0 && mean_dim_power.is_finite()
            }
            Self::Cauchy { location, scale } => location.is_finite() && scale.is_finite() && scale > 0.0,
            Self::StudentT { dof } => dof >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid marginal {self:?}")))
        }
    }

    fn resolve(&self, d: usize) -> Coord {
        match *self {
            Self::Normal { mean, var, mean_dim_power } => Coord::Normal {
                mean: mean * (d as f64).powf(mean_dim_power),
                sd: var.sqrt(),
            },
            Self::Cauchy { location, scale } => Coord::Cauchy { location, scale },
            Self::StudentT { dof } => Coord::StudentT { dof },
        }
    }
}

/// Number of coordinates a segment covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoordCount {
    /// `floor(d / 2)`.
    Half,
    /// `min(d, floor(d^beta))`.
    FloorPower { beta: f64 },
    Fixed { count: usize },
    /// Whatever the earlier segments left over. Only valid last.
    Rest,
}

impl CoordCount {
    fn resolve(&self, d: usize, used: usize) -> usize {
        let remaining = d - used;
        match *self {
            Self::Half => (d / 2).min(remaining),
            Self::FloorPower { beta } => floor_tolerant((d as f64).powf(beta)).min(remaining),
            Self::Fixed { count } => count.min(remaining),
            Self::Rest => remaining,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub count: CoordCount,
    pub marginal: Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub law: LawSpec,
}

/// Dimension-generic distribution descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    /// Independent coordinates, filled segment by segment.
    Independent { segments: Vec<Segment> },
    /// Gaussian with covariance `var * rho^|i-j|` and constant mean.
    Ar1 { rho: f64, mean: f64, var: f64 },
    /// Finite mixture of whole-vector laws.
    Mixture { components: Vec<MixtureComponent> },
}

impl LawSpec {
    /// All `d` coordinates iid with one marginal.
    pub fn iid(marginal: Marginal) -> Self {
        Self::Independent {
            segments: vec![Segment {
                count: CoordCount::Rest,
                marginal,
            }],
        }
    }

    /// `head` marginal on the first `count` coordinates, `tail` on the rest.
    pub fn split(count: CoordCount, head: Marginal, tail: Marginal) -> Self {
        Self::Independent {
            segments: vec![
                Segment { count, marginal: head },
                Segment {
                    count: CoordCount::Rest,
                    marginal: tail,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Independent { segments } => {
                if segments.is_empty() {
                    return Err(Error::InvalidParameter("independent law needs a segment".into()));
                }
                for (i, s) in segments.iter().enumerate() {
                    s.marginal.validate()?;
                    if s.count == CoordCount::Rest && i + 1 != segments.len() {
                        return Err(Error::InvalidParameter(
                            "a `rest` segment must come last".into(),
                        ));
                    }
                }
                Ok(())
            }
            Self::Ar1 { rho, mean, var } => {
                if !(rho.abs() < 1.0 && mean.is_finite() && var.is_finite() && *var >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "invalid AR(1) law rho={rho}, mean={mean}, var={var}"
                    )));
                }
                Ok(())
            }
            Self::Mixture { components } => {
                if components.is_empty() || components.iter().any(|c| c.weight.is_nan() || c.weight <= 0.0) {
                    return Err(Error::InvalidParameter(
                        "mixture weights must be positive and non-empty".into(),
                    ));
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "mixture weights sum to {total}, not 1"
                    )));
                }
                components.iter().try_for_each(|c| c.law.validate())
            }
        }
    }

    pub fn resolve(&self, d: usize) -> Result<Law> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        self.validate()?;
        Ok(self.resolve_checked(d))
    }

    fn resolve_checked(&self, d: usize) -> Law {
        let kind = match self {
            Self::Independent { segments } => {
                let mut used = 0;
                let mut blocks = Vec::new();
                for s in segments {
                    let len = s.count.resolve(d, used);
                    if len > 0 {
                        blocks.push((len, s.marginal.resolve(d)));
                    }
                    used += len;
                }
                if used < d {
                    // Unspecified trailing coordinates repeat the last marginal.
                    let last = segments.last().expect("validated").marginal.resolve(d);
                    blocks.push((d - used, last));
                }
                LawKind::Independent(blocks)
            }
            Self::Ar1 { rho, mean, var } => LawKind::Ar1 {
                rho: *rho,
                innovation: (1.0 - rho * rho).sqrt(),
                mean: *mean,
                sd: var.sqrt(),
            },
            Self::Mixture { components } => {
                let mut acc = 0.0;
                let parts = components
                    .iter()
                    .map(|c| {
                        acc += c.weight;
                        (acc, c.law.resolve_checked(d))
                    })
                    .collect();
                LawKind::Mixture(parts)
            }
        };
        Law {
            dim: d,
            description: self.describe(d),
            kind,
        }
    }

    pub fn describe(&self, d: usize) -> String {
        match self {
            Self::Independent { segments } => {
                let mut used = 0;
                let parts: Vec<String> = segments
                    .iter()
                    .map(|s| {
                        let len = s.count.resolve(d, used);
                        used += len;
                        format!("{len} x {}", describe_coord(&s.marginal.resolve(d)))
                    })
                    .collect();
                format!("independent[{}]", parts.join(", "))
            }
            Self::Ar1 { rho, mean, var } => format!("ar1(d={d}, rho={rho}, mean={mean}, var={var})"),
            Self::Mixture { components } => {
                let parts: Vec<String> = components
                    .iter()
                    .map(|c| format!("{} * {}", c.weight, c.law.describe(d)))
                    .collect();
                format!("mixture[{}]", parts.join(" + "))
            }
        }
    }
}

fn describe_coord(c: &Coord) -> String {
    match *c {
        Coord::Normal { mean, sd } => format!("N({mean}, {})", sd * sd),
        Coord::Cauchy { location, scale } => format!("Cauchy({location}, {scale})"),
        Coord::StudentT { dof } => format!("t({dof})"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Coord {
    Normal { mean: f64, sd: f64 },
    Cauchy { location: f64, scale: f64 },
    StudentT { dof: u32 },
}

impl Coord {
    #[inline]
    fn draw(&self, rng: &mut StreamRng) -> f64 {
        match *self {
            Self::Normal { mean, sd } => mean + sd * std_normal(rng),
            // inverse CDF
            Self::Cauchy { location, scale } => {
                location + scale * (std::f64::consts::PI * (open01(rng) - 0.5)).tan()
            }
            // ratio Z / sqrt(chi2_dof / dof), chi2 as a sum of squared normals
            Self::StudentT { dof } => {
                let z = std_normal(rng);
                let chi2: f64 = (0..dof).map(|_| std_normal(rng).powi(2)).sum();
                z / (chi2 / f64::from(dof)).sqrt()
            }
        }
    }
}

#[inline]
fn std_normal(rng: &mut StreamRng) -> f64 {
    rng.sample(StandardNormal)
}

#[derive(Debug, Clone)]
enum LawKind {
    Independent(Vec<(usize, Coord)>),
    Ar1 {
        rho: f64,
        innovation: f64,
        mean: f64,
        sd: f64,
    },
    /// Cumulative weights with their components.
    Mixture(Vec<(f64, Law)>),
}

/// A [`LawSpec`] resolved at a fixed dimension.
#[derive(Debug, Clone)]
pub struct Law {
    dim: usize,
    description: String,
    kind: LawKind,
}

impl Sampler for Law {
    fn dim(&self) -> usize {
        self.dim
    }

    fn describe(&self) -> String {
        self.description.clone()
    }

    fn sample_into(&self, rng: &mut StreamRng, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            LawKind::Independent(blocks) => {
                let mut pos = 0;
                for (len, coord) in blocks {
                    for v in &mut out[pos..pos + len] {
                        *v = coord.draw(rng);
                    }
                    pos += len;
                }
            }
            LawKind::Ar1 {
                rho,
                innovation,
                mean,
                sd,
            } => {
                // stationary recursion: unit marginal variance, lag-k correlation rho^k
                let mut prev = std_normal(rng);
                out[0] = mean + sd * prev;
                for v in &mut out[1..] {
                    prev = rho * prev + innovation * std_normal(rng);
                    *v = mean + sd * prev;
                }
            }
            LawKind::Mixture(parts) => {
                let u = open01(rng);
                let law = parts
                    .iter()
                    .find(|(cum, _)| u < *cum)
                    .map_or(&parts[parts.len() - 1].1, |(_, l)| l);
                law.sample_into(rng, out);
            }
        }
    }
}
