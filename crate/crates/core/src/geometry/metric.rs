use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{ExtSpace, Orientation};
use crate::scalar::Scalar;

/// A chart-domain metric: point → symmetric positive-definite matrix. Must be pure.
pub trait MetricField<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[T]) -> DMatrix<T>;
    /// True when the matrix does not depend on the point; lets callers skip differencing.
    fn is_constant(&self) -> bool {
        false
    }
}

/// The identity metric.
#[derive(Clone, Copy, Debug)]
pub struct Euclidean(pub usize);

impl<T: Scalar> MetricField<T> for Euclidean {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, _x: &[T]) -> DMatrix<T> {
        DMatrix::identity(self.0, self.0)
    }
    fn is_constant(&self) -> bool {
        true
    }
}

/// A point-independent metric.
#[derive(Clone, Debug)]
pub struct ConstantMetric<T: Scalar>(pub DMatrix<T>);

impl<T: Scalar> MetricField<T> for ConstantMetric<T> {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn eval(&self, _x: &[T]) -> DMatrix<T> {
        self.0.clone()
    }
    fn is_constant(&self) -> bool {
        true
    }
}

/// A metric given by a closure.
pub struct FnMetric<T: Scalar> {
    n: usize,
    f: Arc<dyn Fn(&[T]) -> DMatrix<T> + Send + Sync>,
}

impl<T: Scalar> FnMetric<T> {
    pub fn new(n: usize, f: impl Fn(&[T]) -> DMatrix<T> + Send + Sync + 'static) -> Self {
        FnMetric { n, f: Arc::new(f) }
    }
}

impl<T: Scalar> MetricField<T> for FnMetric<T> {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[T]) -> DMatrix<T> {
        (self.f)(x)
    }
}

/// f(x)² · base(x).
pub struct ConformalMetric<T: Scalar> {
    pub base: Arc<dyn MetricField<T>>,
    pub factor: Arc<dyn Fn(&[T]) -> T + Send + Sync>,
}

impl<T: Scalar> MetricField<T> for ConformalMetric<T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn eval(&self, x: &[T]) -> DMatrix<T> {
        let f = (self.factor)(x);
        self.base.eval(x) * (f * f)
    }
}

/// The oriented inner product space (ℝⁿ, g(x)); validates positivity.
pub fn space_at<T: Scalar>(g: &dyn MetricField<T>, x: &[T], orientation: Orientation) -> Result<ExtSpace<T>> {
    if g.is_constant() {
        let m = g.eval(x);
        if m == DMatrix::identity(g.dim(), g.dim()) {
            return Ok(ExtSpace::euclidean(g.dim()).with_orientation(orientation));
        }
        return ExtSpace::with_metric(m, orientation);
    }
    ExtSpace::with_metric(g.eval(x), orientation)
}

/// Box-shaped chart domain; periodic axes wrap and need no boundary margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub periodic: Vec<bool>,
}

impl ChartDomain {
    /// Flat torus [0, 2π)ⁿ.
    pub fn torus(n: usize) -> Self {
        ChartDomain { lower: vec![0.0; n], upper: vec![std::f64::consts::TAU; n], periodic: vec![true; n] }
    }

    /// All of ℝⁿ.
    pub fn whole(n: usize) -> Self {
        ChartDomain { lower: vec![f64::NEG_INFINITY; n], upper: vec![f64::INFINITY; n], periodic: vec![false; n] }
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        let n = lower.len();
        ChartDomain { lower, upper, periodic: vec![false; n] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic.iter().all(|&p| p)
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    /// Error unless x sits at least `margin` inside every non-periodic face.
    pub fn check_interior<T: Scalar>(&self, x: &[T], margin: T) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!("point of length {} in a {}-dimensional chart", x.len(), self.dim())));
        }
        let m = margin.to_f64_lossy();
        for (i, xi) in x.iter().enumerate() {
            if self.periodic[i] {
                continue;
            }
            let v = xi.to_f64_lossy();
            if v - m < self.lower[i] || v + m > self.upper[i] {
                return Err(Error::Domain(format!(
                    "coordinate {i} = {v} is within {m} of the chart boundary [{}, {}]",
                    self.lower[i], self.upper[i]
                )));
            }
        }
        Ok(())
    }
}
