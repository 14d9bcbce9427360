use std::sync::Arc;

use nalgebra::DVector;

use super::christoffel::christoffel;
use super::fd::{partial, FdConfig};
use super::metric::MetricField;
use crate::error::{Error, Result};
use crate::exterior::{index::subsets, ExtSpace, KForm};
use crate::scalar::Scalar;

/// A differential form on a chart: point → coordinate coefficients. Must be pure.
pub trait FormField<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;
    fn degree(&self) -> usize;
    /// Coefficients at x on Euclidean ℝⁿ; callers rebase onto (ℝⁿ, h(x)).
    fn eval(&self, x: &[T]) -> KForm<T>;
    fn is_constant(&self) -> bool {
        false
    }
}

/// A constant-coefficient form.
#[derive(Clone, Debug)]
pub struct ConstantForm<T: Scalar>(pub KForm<T>);

impl<T: Scalar> FormField<T> for ConstantForm<T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn degree(&self) -> usize {
        self.0.degree()
    }
    fn eval(&self, _x: &[T]) -> KForm<T> {
        self.0.clone()
    }
    fn is_constant(&self) -> bool {
        true
    }
}

/// A form given by a closure.
pub struct FnForm<T: Scalar> {
    n: usize,
    k: usize,
    f: Arc<dyn Fn(&[T]) -> KForm<T> + Send + Sync>,
}

impl<T: Scalar> FnForm<T> {
    pub fn new(n: usize, k: usize, f: impl Fn(&[T]) -> KForm<T> + Send + Sync + 'static) -> Self {
        FnForm { n, k, f: Arc::new(f) }
    }
}

impl<T: Scalar> FormField<T> for FnForm<T> {
    fn dim(&self) -> usize {
        self.n
    }
    fn degree(&self) -> usize {
        self.k
    }
    fn eval(&self, x: &[T]) -> KForm<T> {
        (self.f)(x)
    }
}

fn coeff_partial<T: Scalar>(alpha: &dyn FormField<T>, x: &[T], axis: usize, fd: &FdConfig<T>) -> Vec<T> {
    let f = |y: &[T]| alpha.eval(y).coeffs().to_vec();
    partial(&f, x, axis, fd.h1, fd.richardson)
}

/// ∇_V α at x, with ∂α by central differences and Γ from the metric.
pub fn covariant_derivative_form<T: Scalar>(
    alpha: &dyn FormField<T>,
    g: &dyn MetricField<T>,
    v: &DVector<T>,
    x: &[T],
    fd: &FdConfig<T>,
) -> Result<KForm<T>> {
    let n = alpha.dim();
    if v.len() != n || x.len() != n || g.dim() != n {
        return Err(Error::Dimension("vector, point, metric and form dimensions differ".into()));
    }
    let flat = ExtSpace::euclidean(n);
    let k = alpha.degree();
    let a0 = alpha.eval(x).rebase(&flat)?;
    let mut out = KForm::zero(&flat, k);
    if !alpha.is_constant() {
        for j in 0..n {
            if v[j] == T::zero() {
                continue;
            }
            let d = coeff_partial(alpha, x, j, fd);
            for (o, dj) in out.coeffs_mut().iter_mut().zip(d) {
                *o += v[j] * dj;
            }
        }
    }
    if !g.is_constant() {
        let gamma = christoffel(g, x, fd)?;
        // (Γ_V)[l][i] = V^j Γ^l_{j i}
        let gv = gamma.contract(v.as_slice());
        out = &out - &a0.derivation(&gv);
    }
    Ok(out)
}

/// dα at x: (dα)_J = Σ_m (−1)^m ∂_{j_m} α_{J∖j_m}.
pub fn exterior_derivative<T: Scalar>(alpha: &dyn FormField<T>, x: &[T], fd: &FdConfig<T>) -> Result<KForm<T>> {
    let n = alpha.dim();
    let k = alpha.degree();
    if k >= n {
        return Err(Error::Degree(format!("d of a {k}-form in dimension {n} has no room")));
    }
    let flat = ExtSpace::euclidean(n);
    let mut out = KForm::zero(&flat, k + 1);
    if alpha.is_constant() {
        return Ok(out);
    }
    let partials: Vec<Vec<T>> = (0..n).map(|j| coeff_partial(alpha, x, j, fd)).collect();
    let rank_k = |idx: &[usize]| crate::exterior::index::rank(idx);
    for (r, jdx) in subsets(n, k + 1).iter().enumerate() {
        let mut s = T::zero();
        for m in 0..=k {
            let mut rest = jdx.clone();
            let j = rest.remove(m);
            let v = partials[j][rank_k(&rest)];
            s += if m % 2 == 0 { v } else { -v };
        }
        out.coeffs_mut()[r] = s;
    }
    Ok(out)
}

/// Largest |dα| coefficient over the given points; constant forms return 0.
pub fn closedness_defect<T: Scalar>(alpha: &dyn FormField<T>, points: &[Vec<T>], fd: &FdConfig<T>) -> Result<T> {
    if alpha.is_constant() || alpha.degree() >= alpha.dim() {
        return Ok(T::zero());
    }
    let mut d = T::zero();
    for x in points {
        d = d.max(exterior_derivative(alpha, x, fd)?.max_abs());
    }
    Ok(d)
}
