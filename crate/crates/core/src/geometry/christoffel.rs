use nalgebra::DMatrix;

use super::fd::{gradient, FdConfig};
use super::metric::MetricField;
use crate::error::Result;
use crate::linalg;
use crate::scalar::Scalar;

/// Γ^k_{ij} at a point, stored densely as `[k][i][j]`.
#[derive(Clone, Debug)]
pub struct Christoffel<T: Scalar> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Christoffel<T> {
    pub fn zero(n: usize) -> Self {
        Christoffel { n, data: vec![T::zero(); n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Γ^k_{ij}.
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> T {
        self.data[(k * self.n + i) * self.n + j]
    }

    /// Matrix (Γ_i)[k][j] = Γ^k_{ij}: the connection one-form paired with ∂_i.
    pub fn along(&self, i: usize) -> DMatrix<T> {
        DMatrix::from_fn(self.n, self.n, |k, j| self.get(k, i, j))
    }

    /// Matrix Σ_i v^i Γ_i.
    pub fn contract(&self, v: &[T]) -> DMatrix<T> {
        DMatrix::from_fn(self.n, self.n, |k, j| (0..self.n).fold(T::zero(), |s, i| s + v[i] * self.get(k, i, j)))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
    }
}

/// Partial derivatives ∂_l g as matrices, by central differences.
pub fn metric_derivatives<T: Scalar>(g: &dyn MetricField<T>, x: &[T], fd: &FdConfig<T>) -> Vec<DMatrix<T>> {
    let n = g.dim();
    if g.is_constant() {
        return vec![DMatrix::zeros(n, n); x.len()];
    }
    let f = |y: &[T]| g.eval(y).as_slice().to_vec();
    gradient(&f, x, fd.h1, fd.richardson)
        .into_iter()
        .map(|d| DMatrix::from_column_slice(n, n, &d))
        .collect()
}

/// Γ^k_{ij} = ½ g^{kl} (∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij}); symmetric in (i, j) by construction.
pub fn christoffel<T: Scalar>(g: &dyn MetricField<T>, x: &[T], fd: &FdConfig<T>) -> Result<Christoffel<T>> {
    let n = g.dim();
    let gx = g.eval(x);
    linalg::check_spd(&gx, T::lit(1e-12))?;
    if g.is_constant() {
        return Ok(Christoffel::zero(n));
    }
    let ginv = linalg::spd_inverse(&linalg::sym(&gx))?;
    let dg = metric_derivatives(g, x, fd);
    let half = T::lit(0.5);
    let mut out = Christoffel::zero(n);
    for i in 0..n {
        for j in i..n {
            // lowered symbol Γ_{l,ij}
            let low: Vec<T> = (0..n).map(|l| half * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)])).collect();
            for k in 0..n {
                let v = (0..n).fold(T::zero(), |s, l| s + ginv[(k, l)] * low[l]);
                out.data[(k * n + i) * n + j] = v;
                out.data[(k * n + j) * n + i] = v;
            }
        }
    }
    Ok(out)
}
