use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::index::{subsets, MAX_DIM};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Orientation attached to the lexicographic top index (1,…,n).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Orientation {
    #[default]
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Orientation::Positive => T::one(),
            Orientation::Negative => -T::one(),
        }
    }

    pub fn from_sign(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Orientation::Positive),
            -1 => Ok(Orientation::Negative),
            _ => Err(Error::InvalidInput(format!("orientation must be ±1, got {s}"))),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

#[derive(Debug)]
struct MetricData<T: Scalar> {
    g: DMatrix<T>,
    g_inv: DMatrix<T>,
    chol: DMatrix<T>,
    sqrt_det: T,
}

/// An oriented inner product space ℝⁿ. Cheap to clone.
#[derive(Clone, Debug)]
pub struct ExtSpace<T: Scalar> {
    dim: usize,
    orientation: Orientation,
    metric: Option<Arc<MetricData<T>>>,
}

impl<T: Scalar> ExtSpace<T> {
    /// Euclidean ℝⁿ with the standard orientation.
    pub fn euclidean(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension must be in 1..={MAX_DIM}");
        ExtSpace { dim: n, orientation: Orientation::Positive, metric: None }
    }

    pub fn with_orientation(mut self, o: Orientation) -> Self {
        self.orientation = o;
        self
    }

    /// ℝⁿ with metric `g`; rejects non-symmetric or non positive-definite input.
    pub fn with_metric(g: DMatrix<T>, orientation: Orientation) -> Result<Self> {
        let n = g.nrows();
        if n == 0 || n > MAX_DIM {
            return Err(Error::Dimension(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        let chol = linalg::check_spd(&g, T::lit(1e-12))?;
        let g = linalg::sym(&g);
        let g_inv = linalg::spd_inverse(&g)?;
        let sqrt_det = (0..n).fold(T::one(), |a, i| a * chol[(i, i)]);
        Ok(ExtSpace {
            dim: n,
            orientation,
            metric: Some(Arc::new(MetricData { g, g_inv, chol, sqrt_det })),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn is_euclidean(&self) -> bool {
        self.metric.is_none()
    }

    pub fn metric(&self) -> DMatrix<T> {
        match &self.metric {
            Some(m) => m.g.clone(),
            None => DMatrix::identity(self.dim, self.dim),
        }
    }

    pub fn inverse_metric(&self) -> DMatrix<T> {
        match &self.metric {
            Some(m) => m.g_inv.clone(),
            None => DMatrix::identity(self.dim, self.dim),
        }
    }

    /// Lower Cholesky factor L with g = L Lᵀ.
    pub fn cholesky(&self) -> DMatrix<T> {
        match &self.metric {
            Some(m) => m.chol.clone(),
            None => DMatrix::identity(self.dim, self.dim),
        }
    }

    /// √det g.
    pub fn sqrt_det(&self) -> T {
        self.metric.as_ref().map_or(T::one(), |m| m.sqrt_det)
    }

    /// Same dimension, orientation and metric.
    pub fn compatible(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.orientation != other.orientation {
            return false;
        }
        match (&self.metric, &other.metric) {
            (None, None) => true,
            (Some(a), Some(b)) => Arc::ptr_eq(a, b) || a.g == b.g,
            (Some(a), None) | (None, Some(a)) => a.g == DMatrix::identity(self.dim, self.dim),
        }
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.compatible(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "operands live on different spaces (dims {} and {})",
                self.dim, other.dim
            )))
        }
    }

    /// Gram matrix of ⟨e^I, e^J⟩ = det(g⁻¹[I,J]) on Λᵏ(V*), `None` when Euclidean.
    pub fn form_gram(&self, k: usize) -> Option<DMatrix<T>> {
        self.metric.as_ref().map(|m| induced_gram(&m.g_inv, k))
    }

    /// Gram matrix of ⟨e_I, e_J⟩ = det(g[I,J]) on Λᵏ(V), `None` when Euclidean.
    pub fn vector_gram(&self, k: usize) -> Option<DMatrix<T>> {
        self.metric.as_ref().map(|m| induced_gram(&m.g, k))
    }
}

/// Matrix of k×k minors M[I,J] of a symmetric matrix.
pub(crate) fn induced_gram<T: Scalar>(m: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let subs = subsets(m.nrows(), k);
    let d = subs.len();
    let mut out = DMatrix::zeros(d, d);
    let mut buf = Vec::new();
    for (a, i) in subs.iter().enumerate() {
        for (b, j) in subs.iter().enumerate().skip(a) {
            let v = linalg::minor(m, i, j, &mut buf);
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    out
}
