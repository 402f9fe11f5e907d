//! Sample containers and group labelings.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major `rows x dim` table of finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<S> {
    rows: usize,
    dim: usize,
    values: Vec<S>,
}

impl<S: Real> DataMatrix<S> {
    pub fn new(rows: usize, dim: usize, values: Vec<S>) -> Result<Self> {
        if rows == 0 || dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "a data matrix needs at least one row and one column (got {rows} x {dim})"
            )));
        }
        if rows.checked_mul(dim) != Some(values.len()) {
            return Err(Error::ShapeMismatch {
                rows,
                dim,
                len: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self { rows, dim, values })
    }

    pub fn from_rows<R: AsRef<[S]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), dim, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[S]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    /// Keeps the listed rows, in the listed order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            if i >= self.rows {
                return Err(Error::InvalidParameter(format!(
                    "row {i} out of range for {} rows",
                    self.rows
                )));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(idx.len(), self.dim, values)
    }

    pub fn convert<T: Real>(&self) -> DataMatrix<T> {
        DataMatrix {
            rows: self.rows,
            dim: self.dim,
            values: self
                .values
                .iter()
                .map(|v| T::from_f64_lossy(v.as_f64()))
                .collect(),
        }
    }
}

/// The statistic divides by `n - 2` and `m - 2`.
pub const MIN_GROUP_SIZE: usize = 3;

/// Two samples of equal dimension, pooled as `x` rows followed by `y` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledSample<S> {
    x: DataMatrix<S>,
    y: DataMatrix<S>,
}

impl<S: Real> PooledSample<S> {
    pub fn new(x: DataMatrix<S>, y: DataMatrix<S>) -> Result<Self> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                found: y.dim(),
            });
        }
        if x.rows() < MIN_GROUP_SIZE || y.rows() < MIN_GROUP_SIZE {
            return Err(Error::SampleTooSmall {
                n: x.rows(),
                m: y.rows(),
                min: MIN_GROUP_SIZE,
            });
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &DataMatrix<S> {
        &self.x
    }

    pub fn y(&self) -> &DataMatrix<S> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn m(&self) -> usize {
        self.y.rows()
    }

    pub fn total(&self) -> usize {
        self.n() + self.m()
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// Pooled observation `i`: `x` rows first, then `y` rows.
    pub fn point(&self, i: usize) -> &[S] {
        if i < self.n() {
            self.x.row(i)
        } else {
            self.y.row(i - self.n())
        }
    }
}

/// Group assignment of the pooled sample: 0 for the first sample, 1 for the second.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling {
    labels: Vec<u8>,
    n: usize,
}

impl Labeling {
    /// Identity split: first `n` points labeled 0, the remaining `m` labeled 1.
    pub fn identity(n: usize, m: usize) -> Self {
        let mut labels = vec![0u8; n + m];
        labels[n..].fill(1);
        Self { labels, n }
    }

    pub fn from_labels(labels: Vec<u8>) -> Result<Self> {
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParameter(format!("label {bad} is not 0 or 1")));
        }
        let n = labels.iter().filter(|&&l| l == 0).count();
        Ok(Self { labels, n })
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.labels.len() - self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labels with the two groups exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            labels: self.labels.iter().map(|l| 1 - l).collect(),
            n: self.m(),
        }
    }

    pub(crate) fn check_counts(&self, n: usize, m: usize) -> Result<()> {
        if self.n != n || self.m() != m {
            return Err(Error::LabelCount {
                zeros: self.n,
                ones: self.m(),
                n,
                m,
            });
        }
        Ok(())
    }
}

/// Labels `perm[0..n]` as the first sample and every other position as the second.
pub fn labeling_from_permutation(perm: &[usize], n: usize) -> Result<Labeling> {
    let total = perm.len();
    if n == 0 || n >= total {
        return Err(Error::InvalidParameter(format!(
            "need 0 < n < N, got n={n}, N={total}"
        )));
    }
    let mut seen = vec![false; total];
    for &p in perm {
        if p >= total {
            return Err(Error::InvalidPermutation(format!(
                "entry {p} out of range 0..{total}"
            )));
        }
        if std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation(format!("entry {p} repeated")));
        }
    }
    let mut labels = vec![1u8; total];
    for &p in &perm[..n] {
        labels[p] = 0;
    }
    Ok(Labeling { labels, n })
}
