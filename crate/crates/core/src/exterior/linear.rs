use nalgebra::DMatrix;

use super::form::{KForm, KVector};
use super::index::subsets;
use super::space::ExtSpace;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// A linear map between oriented inner product spaces, stored as an n₂×n₁ matrix.
#[derive(Clone, Debug)]
pub struct LinearMap<T: Scalar> {
    source: ExtSpace<T>,
    target: ExtSpace<T>,
    matrix: DMatrix<T>,
}

impl<T: Scalar> LinearMap<T> {
    pub fn new(source: &ExtSpace<T>, target: &ExtSpace<T>, matrix: DMatrix<T>) -> Result<Self> {
        if matrix.nrows() != target.dim() || matrix.ncols() != source.dim() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                target.dim(),
                source.dim()
            )));
        }
        Ok(LinearMap { source: source.clone(), target: target.clone(), matrix })
    }

    /// Map between Euclidean spaces.
    pub fn euclidean(matrix: DMatrix<T>) -> Self {
        let s = ExtSpace::euclidean(matrix.ncols());
        let t = ExtSpace::euclidean(matrix.nrows());
        LinearMap { source: s, target: t, matrix }
    }

    pub fn source(&self) -> &ExtSpace<T> {
        &self.source
    }

    pub fn target(&self) -> &ExtSpace<T> {
        &self.target
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// self ∘ other.
    pub fn compose(&self, other: &LinearMap<T>) -> Result<Self> {
        if other.target.dim() != self.source.dim() {
            return Err(Error::Dimension("maps are not composable".into()));
        }
        Ok(LinearMap { source: other.source.clone(), target: self.target.clone(), matrix: &self.matrix * &other.matrix })
    }

    /// Induced map Λᵏ A; identically zero when k exceeds either dimension.
    pub fn lambda_k(&self, k: usize) -> InducedMap<T> {
        InducedMap { k, source: self.source.clone(), target: self.target.clone(), matrix: minors_matrix(&self.matrix, k) }
    }

    /// Pullback A*β of a form on the target.
    pub fn pullback(&self, beta: &KForm<T>) -> Result<KForm<T>> {
        if beta.dim() != self.target.dim() {
            return Err(Error::Dimension("form does not live on the target".into()));
        }
        beta.pullback_matrix(&self.matrix, &self.source)
    }
}

/// Matrix of k×k minors: entry (J, I) = det A[J, I], J ⊂ rows, I ⊂ columns.
pub fn minors_matrix<T: Scalar>(a: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let rows = subsets(a.nrows(), k);
    let cols = subsets(a.ncols(), k);
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    let mut buf = Vec::new();
    for (r, j) in rows.iter().enumerate() {
        for (c, i) in cols.iter().enumerate() {
            out[(r, c)] = linalg::minor(a, j, i, &mut buf);
        }
    }
    out
}

/// Λᵏ A : Λᵏ V₁ → Λᵏ V₂ in the colex bases.
#[derive(Clone, Debug)]
pub struct InducedMap<T: Scalar> {
    k: usize,
    source: ExtSpace<T>,
    target: ExtSpace<T>,
    matrix: DMatrix<T>,
}

impl<T: Scalar> InducedMap<T> {
    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// Apply to a k-vector. Fails only on degree or dimension mismatch.
    pub fn apply(&self, w: &KVector<T>) -> Result<KVector<T>> {
        if w.degree() != self.k || w.dim() != self.source.dim() {
            return Err(Error::Degree("k-vector does not match the induced map".into()));
        }
        if self.k > self.target.dim() {
            return Err(Error::Degree("image degree exceeds target dimension".into()));
        }
        let v = &self.matrix * nalgebra::DVector::from_column_slice(w.coeffs());
        KVector::from_coeffs(&self.target, self.k, v.as_slice().to_vec())
    }

    /// self ∘ other.
    pub fn compose(&self, other: &InducedMap<T>) -> Result<Self> {
        if self.k != other.k || other.target.dim() != self.source.dim() {
            return Err(Error::Dimension("induced maps are not composable".into()));
        }
        Ok(InducedMap { k: self.k, source: other.source.clone(), target: self.target.clone(), matrix: &self.matrix * &other.matrix })
    }
}
