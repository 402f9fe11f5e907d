//! The generalized distance family `h((1/d) * sum_q psi(|a_q - b_q|^2))`.
//!
//! Built-in members:
//!
//! | kind  | h(t)   | psi(t)          |
//! |-------|--------|-----------------|
//! | `L2`  | sqrt t | t               |
//! | `L1`  | t      | sqrt t          |
//! | `Exp` | t      | 1 - exp(-t / 2) |
//! | `Log` | t      | log(1 + t)      |
//!
//! The `1/d` factor is kept for every kind, so `L2` and `L1` are the usual
//! metrics up to a constant factor. Ball memberships only depend on the
//! ordering of distances and are unaffected by it.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Built-in distance kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    L2,
    L1,
    Exp,
    Log,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 4] = [Self::L2, Self::L1, Self::Exp, Self::Log];

    pub fn name(self) -> &'static str {
        match self {
            Self::L2 => "l2",
            Self::L1 => "l1",
            Self::Exp => "exp",
            Self::Log => "log",
        }
    }

    /// Stable small integer, used when deriving RNG substreams.
    pub fn id(self) -> u64 {
        match self {
            Self::L2 => 0,
            Self::L1 => 1,
            Self::Exp => 2,
            Self::Log => 3,
        }
    }

    pub fn spec<S: Real>(self) -> DistanceSpec<S> {
        DistanceSpec::Builtin(self)
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(Self::L2),
            "l1" => Ok(Self::L1),
            "exp" => Ok(Self::Exp),
            "log" => Ok(Self::Log),
            other => Err(Error::InvalidParameter(format!(
                "unknown distance kind `{other}` (expected l2, l1, exp or log)"
            ))),
        }
    }
}

type ScalarMap<S> = Arc<dyn Fn(S) -> S + Send + Sync>;

/// User-supplied `h` and `psi`. Both must be nondecreasing on `[0, inf)` and
/// vanish at zero; only the latter can be checked.
#[derive(Clone)]
pub struct CustomHPsi<S> {
    name: String,
    h: ScalarMap<S>,
    psi: ScalarMap<S>,
}

impl<S: Real> CustomHPsi<S> {
    pub fn new(
        name: impl Into<String>,
        h: impl Fn(S) -> S + Send + Sync + 'static,
        psi: impl Fn(S) -> S + Send + Sync + 'static,
    ) -> Result<Self> {
        if h(S::zero()) != S::zero() || psi(S::zero()) != S::zero() {
            return Err(Error::InvalidParameter(
                "custom h and psi must both map 0 to 0".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            h: Arc::new(h),
            psi: Arc::new(psi),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl<S> fmt::Debug for CustomHPsi<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomHPsi").field("name", &self.name).finish()
    }
}

/// Selection of the dissimilarity used to build balls.
#[derive(Debug, Clone)]
pub enum DistanceSpec<S> {
    Builtin(DistanceKind),
    Custom(CustomHPsi<S>),
}

impl<S: Real> DistanceSpec<S> {
    pub fn name(&self) -> &str {
        match self {
            Self::Builtin(k) => k.name(),
            Self::Custom(c) => c.name(),
        }
    }

    /// Applies `psi` to a squared coordinate gap.
    #[inline]
    pub fn psi(&self, t: S) -> S {
        match self {
            Self::Builtin(DistanceKind::L2) => t,
            Self::Builtin(DistanceKind::L1) => t.sqrt(),
            Self::Builtin(DistanceKind::Exp) => -(-t * S::from_f64_lossy(0.5)).exp_m1(),
            Self::Builtin(DistanceKind::Log) => t.ln_1p(),
            Self::Custom(c) => (c.psi)(t),
        }
    }

    #[inline]
    pub fn h(&self, t: S) -> S {
        match self {
            Self::Builtin(DistanceKind::L2) => t.sqrt(),
            Self::Builtin(_) => t,
            Self::Custom(c) => (c.h)(t),
        }
    }

    /// `(1/d) * sum_q psi(|a_q - b_q|^2)`, accumulated in coordinate order.
    #[inline]
    pub(crate) fn psi_mean_unchecked(&self, a: &[S], b: &[S]) -> S {
        let sum = match self {
            // Monomorphic fast paths for the hot loop.
            Self::Builtin(DistanceKind::L2) => a
                .iter()
                .zip(b)
                .fold(S::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y)),
            Self::Builtin(DistanceKind::L1) => a
                .iter()
                .zip(b)
                .fold(S::zero(), |acc, (&x, &y)| acc + (x - y).abs()),
            _ => a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| {
                let g = x - y;
                acc + self.psi(g * g)
            }),
        };
        sum / S::from_usize(a.len()).expect("dimension fits the scalar")
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, a: &[S], b: &[S]) -> S {
        self.h(self.psi_mean_unchecked(a, b))
    }
}

fn check_pair<S: Real>(a: &[S], b: &[S]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidParameter("observations must have d >= 1".into()));
    }
    for (row, v) in [a, b].into_iter().enumerate() {
        if let Some(col) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(())
}

/// Distance between two observation vectors of equal dimension.
pub fn distance<S: Real>(a: &[S], b: &[S], spec: &DistanceSpec<S>) -> Result<S> {
    check_pair(a, b)?;
    let v = spec.eval_unchecked(a, b);
    if !v.is_finite() || v < S::zero() {
        return Err(Error::InvalidDistance(v.as_f64()));
    }
    Ok(v)
}

/// The coordinate average of `psi` before `h` is applied.
pub fn psi_mean<S: Real>(a: &[S], b: &[S], spec: &DistanceSpec<S>) -> Result<S> {
    check_pair(a, b)?;
    Ok(spec.psi_mean_unchecked(a, b))
}
