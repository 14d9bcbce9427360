use serde::Serialize;

use crate::scalar::Scalar;

/// Finite-difference steps: `h1` for first derivatives, `h2` for derivatives of
/// quantities that already contain a difference quotient.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FdConfig<T: Scalar> {
    pub h1: T,
    pub h2: T,
    /// Replace D(h) by (4 D(h/2) − D(h)) / 3.
    pub richardson: bool,
}

impl<T: Scalar> Default for FdConfig<T> {
    fn default() -> Self {
        FdConfig { h1: T::lit(1e-4), h2: T::lit(1e-3), richardson: false }
    }
}

impl<T: Scalar> FdConfig<T> {
    pub fn with_step(h: T) -> Self {
        FdConfig { h1: h, h2: h, richardson: false }
    }

    /// Largest distance from the base point any stencil reaches.
    pub fn reach(&self) -> T {
        self.h1.max(self.h2) * T::lit(2.0)
    }
}

fn central<T: Scalar, F>(f: &F, x: &[T], axis: usize, h: T) -> Vec<T>
where
    F: Fn(&[T]) -> Vec<T>,
{
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[axis] += h;
    xm[axis] -= h;
    let fp = f(&xp);
    let fm = f(&xm);
    let s = T::one() / (h + h);
    fp.iter().zip(&fm).map(|(&a, &b)| (a - b) * s).collect()
}

/// ∂f/∂x_axis by central differences, optionally Richardson-extrapolated.
pub fn partial<T: Scalar, F>(f: &F, x: &[T], axis: usize, h: T, richardson: bool) -> Vec<T>
where
    F: Fn(&[T]) -> Vec<T>,
{
    let d = central(f, x, axis, h);
    if !richardson {
        return d;
    }
    let d2 = central(f, x, axis, h * T::lit(0.5));
    let four = T::lit(4.0);
    let three = T::lit(3.0);
    d2.iter().zip(&d).map(|(&a, &b)| (four * a - b) / three).collect()
}

/// All first partials: entry `[axis]` is ∂f/∂x_axis.
pub fn gradient<T: Scalar, F>(f: &F, x: &[T], h: T, richardson: bool) -> Vec<Vec<T>>
where
    F: Fn(&[T]) -> Vec<T>,
{
    (0..x.len()).map(|i| partial(f, x, i, h, richardson)).collect()
}
