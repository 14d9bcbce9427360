use nalgebra::DMatrix;
use serde::Serialize;

use super::linear::LinearMap;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Both sides of |Λ^{n₁}A| ≤ |A|^{n₁}/√n₁^{n₁} and the distance from conformality.
#[derive(Clone, Debug, Serialize)]
pub struct HadamardReport<T: Scalar> {
    pub lhs: T,
    pub rhs: T,
    /// rhs − lhs.
    pub gap: T,
    /// ‖A*g₂ − (|A|²/n₁) g₁‖ in a g₁-orthonormal frame.
    pub conformal_defect: T,
    pub norm_sq: T,
}

/// Evaluate the Hadamard inequality for a linear map with n₁ ≤ n₂.
pub fn hadamard_check<T: Scalar>(a: &LinearMap<T>) -> Result<HadamardReport<T>> {
    let n1 = a.source().dim();
    let n2 = a.target().dim();
    if n1 > n2 {
        return Err(Error::Rank { source_dim: n1, target_dim: n2 });
    }
    let m = a.matrix().transpose() * a.target().metric() * a.matrix();
    let mh = linalg::in_orthonormal_frame(&linalg::sym(&m), &a.source().cholesky());
    let norm_sq = mh.trace();
    let lhs = mh.determinant().max(T::zero()).sqrt();
    let nn = T::of_usize(n1);
    let rhs = (norm_sq / nn).powf(nn / T::lit(2.0));
    let defect = linalg::frob(&(&mh - DMatrix::identity(n1, n1) * (norm_sq / nn)));
    Ok(HadamardReport { lhs, rhs, gap: rhs - lhs, conformal_defect: defect, norm_sq })
}
