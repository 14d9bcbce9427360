use nalgebra::{DMatrix, DVector};

use super::problem::SmithProblem;
use crate::error::{Error, Result};
use crate::geometry::{divergence_mixed, du_norm_sq, p_tension_from_jet, FdConfig};
use crate::scalar::Scalar;

/// τ_k(u) = Div(|du|^{k−2} du) at x, differencing B = |du|^{k−2}du at step `fd.h2`.
pub fn k_tension<T: Scalar>(prob: &SmithProblem<T>, x: &[T], fd: &FdConfig<T>) -> Result<DVector<T>> {
    prob.domain.check_interior(x, fd.reach())?;
    let k = prob.k();
    let map = prob.map.clone();
    let g1 = prob.source_metric.clone();
    let g2 = prob.target_metric.clone();
    let b = move |y: &[T]| -> DMatrix<T> {
        let jet = map.jet(y);
        if k == 2 {
            return jet.jacobian;
        }
        let n2 = du_norm_sq(&jet.jacobian, &g1.eval(y), &g2.eval(&jet.u)).unwrap_or_else(|_| T::zero() / T::zero());
        let c = n2.max(T::zero()).powf(T::lit((k as f64 - 2.0) / 2.0));
        jet.jacobian * c
    };
    if k < 2 {
        let jet = prob.map.jet(x);
        if jet.jacobian.iter().all(|v| *v == T::zero()) {
            return Err(Error::Precondition("|du| = 0 where the 1-tension is singular".into()));
        }
    }
    let tau = divergence_mixed(&b, prob.map.as_ref(), prob.source_metric.as_ref(), prob.target_metric.as_ref(), x, fd)?;
    if tau.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("k-tension is not finite at this point".into()));
    }
    Ok(tau)
}

/// τ_k from the jet's second derivatives; only metric derivatives are differenced.
pub fn k_tension_analytic<T: Scalar>(prob: &SmithProblem<T>, x: &[T], fd: &FdConfig<T>) -> Result<DVector<T>> {
    let jet = prob.map.jet(x);
    p_tension_from_jet(&jet, prob.source_metric.as_ref(), prob.target_metric.as_ref(), prob.k(), fd)
}

/// |τ| measured with the target metric at u(x).
pub fn tension_norm<T: Scalar>(prob: &SmithProblem<T>, x: &[T], tau: &DVector<T>) -> T {
    let u = prob.map.jet(x).u;
    let h = prob.target_metric.eval(&u);
    crate::linalg::inner(tau, tau, &h).max(T::zero()).sqrt()
}
