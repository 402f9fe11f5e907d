//! Simulation settings: distribution pairs, sample-size rules and dimension grids.

mod catalogue;
mod law;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{PooledSample, MIN_GROUP_SIZE};
use crate::error::{Error, Result};
use crate::oracle::Sampler;
use crate::rng::substream;

pub use catalogue::{catalogue, lookup, ScenarioParams, DIM_GRID, SHORT_GRID};
pub use law::{CoordCount, Law, LawSpec, Marginal, MixtureComponent, Segment};

use law::floor_tolerant;

/// How `n` and `m` depend on the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum SizeRule {
    Fixed { n: usize, m: usize },
    /// `n = m = 5 + floor(d^gamma)`.
    PowerPlus5 { gamma: f64 },
    /// `n = m = 5 + floor(sqrt(d))`.
    SqrtPlus5,
    /// `n = m = d + 5`.
    LinearPlus5,
}

impl SizeRule {
    pub fn sizes(&self, d: usize) -> Result<(usize, usize)> {
        let (n, m) = match *self {
            Self::Fixed { n, m } => (n, m),
            Self::PowerPlus5 { gamma } => {
                if !(gamma.is_finite() && gamma >= 0.0) {
                    return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
                }
                let k = 5 + floor_tolerant((d as f64).powf(gamma));
                (k, k)
            }
            Self::SqrtPlus5 => {
                let k = 5 + floor_tolerant((d as f64).sqrt());
                (k, k)
            }
            Self::LinearPlus5 => (d + 5, d + 5),
        };
        if n < MIN_GROUP_SIZE || m < MIN_GROUP_SIZE {
            return Err(Error::SampleTooSmall {
                n,
                m,
                min: MIN_GROUP_SIZE,
            });
        }
        Ok((n, m))
    }
}

/// A scenario for every dimension; [`ScenarioTemplate::at`] fixes `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioTemplate {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub sizes: SizeRule,
    pub f: LawSpec,
    pub g: LawSpec,
    /// Default dimension grid.
    pub dims: Vec<usize>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ScenarioTemplate {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::InvalidParameter("scenario id is empty".into()));
        }
        self.f.validate()?;
        self.g.validate()?;
        for &d in &self.dims {
            self.at(d)?;
        }
        Ok(())
    }

    pub fn at(&self, d: usize) -> Result<ScenarioSpec> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let (n, m) = self.sizes.sizes(d)?;
        Ok(ScenarioSpec {
            id: self.id.clone(),
            d,
            n,
            m,
            f: self.f.clone(),
            g: self.g.clone(),
            params: self.params.clone(),
        })
    }
}

/// One fully specified simulation setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub id: String,
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub f: LawSpec,
    pub g: LawSpec,
    pub params: BTreeMap<String, f64>,
}

impl ScenarioSpec {
    pub fn f_law(&self) -> Result<Law> {
        self.f.resolve(self.d)
    }

    pub fn g_law(&self) -> Result<Law> {
        self.g.resolve(self.d)
    }

    /// Same scenario with different sample sizes.
    pub fn with_sizes(&self, n: usize, m: usize) -> Result<Self> {
        if n < MIN_GROUP_SIZE || m < MIN_GROUP_SIZE {
            return Err(Error::SampleTooSmall {
                n,
                m,
                min: MIN_GROUP_SIZE,
            });
        }
        Ok(Self { n, m, ..self.clone() })
    }
}

/// X from stream `[0]`, Y from stream `[1]` under `seed`.
pub fn draw_dataset(spec: &ScenarioSpec, seed: u64) -> Result<PooledSample<f64>> {
    let f = spec.f_law()?;
    let g = spec.g_law()?;
    draw_with(&f, &g, spec.n, spec.m, seed)
}

/// Like [`draw_dataset`] with laws resolved once by the caller.
pub fn draw_with(f: &Law, g: &Law, n: usize, m: usize, seed: u64) -> Result<PooledSample<f64>> {
    let x = f.sample_matrix(n, &mut substream(seed, &[0]))?;
    let y = g.sample_matrix(m, &mut substream(seed, &[1]))?;
    PooledSample::new(x, y)
}
