use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{ExtSpace, KForm};
use crate::linalg;
use crate::scalar::Scalar;

/// An ordered list of vectors, flagged orthonormal when its Gram matrix is the identity.
#[derive(Clone, Debug)]
pub struct OrientedFrame<T: Scalar> {
    pub vectors: Vec<DVector<T>>,
    pub orthonormal: bool,
}

impl<T: Scalar> OrientedFrame<T> {
    /// Gram defect is measured in the metric of `space`; the flag uses `tol`.
    pub fn new(space: &ExtSpace<T>, vectors: Vec<DVector<T>>, tol: T) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != space.dim()) {
            return Err(Error::Dimension("frame vector length differs from dimension".into()));
        }
        let defect = gram_defect(space, &vectors);
        Ok(OrientedFrame { vectors, orthonormal: defect <= tol })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// max |⟨vᵢ, vⱼ⟩ − δᵢⱼ|.
pub fn gram_defect<T: Scalar>(space: &ExtSpace<T>, vectors: &[DVector<T>]) -> T {
    let g = space.metric();
    let mut d = T::zero();
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let e = if i == j { T::one() } else { T::zero() };
            d = d.max((linalg::inner(a, b, &g) - e).abs());
        }
    }
    d
}

#[derive(Clone, Debug, Serialize)]
pub struct PlaneTest<T: Scalar> {
    pub value: T,
    pub calibrated: bool,
}

/// Orthonormality tolerance for frames passed to the plane checks.
pub const FRAME_TOL: f64 = 1e-10;

/// α on an orthonormal frame; calibrated when the value is 1 within `tol`.
pub fn is_calibrated_plane<T: Scalar>(alpha: &KForm<T>, frame: &[DVector<T>], tol: T) -> Result<PlaneTest<T>> {
    if frame.len() != alpha.degree() {
        return Err(Error::Degree(format!("{}-form on a {}-frame", alpha.degree(), frame.len())));
    }
    let defect = gram_defect(alpha.space(), frame);
    if defect > T::lit(FRAME_TOL) {
        return Err(Error::NotOrthonormal(defect.to_f64_lossy()));
    }
    let value = alpha.evaluate(frame)?;
    Ok(PlaneTest { value, calibrated: (value - T::one()).abs() <= tol })
}

/// α(e₁,…,e_{k−1}, w) for a calibrated frame and w moved orthogonal to it.
///
/// `w` is first projected onto the orthogonal complement of the frame and
/// rescaled to its original length; a vanishing projection returns 0.
pub fn first_cousin_check<T: Scalar>(alpha: &KForm<T>, frame: &[DVector<T>], w: &DVector<T>) -> Result<T> {
    let test = is_calibrated_plane(alpha, frame, T::lit(1e-10))?;
    if !test.calibrated {
        return Err(Error::Precondition(format!(
            "frame is not calibrated (value {}), the first cousin principle does not apply",
            test.value.to_f64_lossy()
        )));
    }
    if w.len() != alpha.dim() {
        return Err(Error::Dimension("vector length differs from dimension".into()));
    }
    let g = alpha.space().metric();
    let len0 = linalg::inner(w, w, &g).max(T::zero()).sqrt();
    let mut p = w.clone();
    for _ in 0..2 {
        for e in frame {
            let c = linalg::inner(e, &p, &g);
            p -= e * c;
        }
    }
    let len = linalg::inner(&p, &p, &g).max(T::zero()).sqrt();
    if len == T::zero() || len <= T::default_epsilon() * len0 {
        return Ok(T::zero());
    }
    let p = p * (len0 / len);
    let mut args: Vec<DVector<T>> = frame[..frame.len() - 1].to_vec();
    args.push(p);
    alpha.evaluate(&args)
}

/// Orthonormal basis of the orthogonal complement of a frame.
pub fn orthogonal_complement<T: Scalar>(space: &ExtSpace<T>, frame: &[DVector<T>]) -> Vec<DVector<T>> {
    let n = space.dim();
    let g = space.metric();
    let mut cols: Vec<DVector<T>> = frame.to_vec();
    cols.extend((0..n).map(|i| DVector::from_fn(n, |r, _| if r == i { T::one() } else { T::zero() })));
    let q = linalg::gram_schmidt(&cols, &g, T::lit(1e-8));
    q.into_iter().skip(frame.len()).take(n - frame.len()).collect()
}

/// Columns of a matrix as vectors.
pub fn columns<T: Scalar>(m: &DMatrix<T>) -> Vec<DVector<T>> {
    (0..m.ncols()).map(|j| m.column(j).into_owned()).collect()
}
