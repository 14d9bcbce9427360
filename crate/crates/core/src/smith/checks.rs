use std::sync::Arc;

use nalgebra::DVector;
use serde::Serialize;

use super::problem::{Direction, PointData, SmithProblem, Tolerances};
use super::residual::{dilation, residual, ResidualReport};
use crate::error::{Error, Result};
use crate::exterior::KForm;
use crate::geometry::{covariant_derivative_form, horizontal_split, ConformalMetric, FnMetric, Split};
use crate::scalar::Scalar;

/// A positive function on L.
pub type ScaleField<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// The same map with the domain metric rescaled by f: g → f²g for immersions,
/// h → h^{(2,0)} + f∘u² h^{(0,2)} for submersions.
pub fn rescaled_problem<T: Scalar>(prob: &SmithProblem<T>, f: ScaleField<T>) -> SmithProblem<T> {
    let mut out = prob.clone();
    match prob.direction {
        Direction::Immersion => {
            out.source_metric = Arc::new(ConformalMetric { base: prob.source_metric.clone(), factor: f });
        }
        Direction::Submersion => {
            let base = prob.source_metric.clone();
            let target = prob.target_metric.clone();
            let map = prob.map.clone();
            let (so, to) = (prob.source_orientation, prob.target_orientation);
            let rank_tol = T::lit(prob.tolerances.rank);
            let n = base.dim();
            out.source_metric = Arc::new(FnMetric::new(n, move |y: &[T]| {
                let h = base.eval(y);
                let jet = map.jet(y);
                let split = crate::geometry::space_at(base.as_ref(), y, so).and_then(|m| {
                    let l = crate::geometry::space_at(target.as_ref(), &jet.u, to)?;
                    horizontal_split(&jet.jacobian, &m, &l, rank_tol)
                });
                match split.ok().as_ref().and_then(Split::frame) {
                    Some(fr) => {
                        let s = f(&jet.u);
                        fr.h20() + fr.h02() * (s * s)
                    }
                    None => h,
                }
            }));
        }
    }
    out
}

/// Original and rescaled reports with the predicted transformation undone.
#[derive(Clone, Debug, Serialize)]
pub struct ConformalCheck {
    pub factor: f64,
    pub original: ResidualReport,
    pub rescaled: ResidualReport,
    /// |λ̃ − λ/f|.
    pub lambda_defect: f64,
    /// |fᵏ r̃_form − r_form|.
    pub form_defect: f64,
    /// |f² r̃_conf − r_conf|.
    pub conformal_defect: f64,
    pub verdicts_preserved: bool,
}

pub fn conformal_invariance_check<T: Scalar>(prob: &SmithProblem<T>, f: ScaleField<T>, x: &[T]) -> Result<ConformalCheck> {
    let at = match prob.direction {
        Direction::Immersion => x.to_vec(),
        Direction::Submersion => prob.map.jet(x).u,
    };
    let s = f(&at);
    if !(s > T::zero()) || !s.is_finite() {
        return Err(Error::Domain(format!("scale factor {} is not positive", s.to_f64_lossy())));
    }
    let original = residual(prob, x)?;
    let rescaled = residual(&rescaled_problem(prob, f), x)?;
    let sf = s.to_f64_lossy();
    let k = prob.k() as i32;
    let (a, b) = (&original.verdicts, &rescaled.verdicts);
    Ok(ConformalCheck {
        factor: sf,
        lambda_defect: (rescaled.lambda - original.lambda / sf).abs(),
        form_defect: (sf.powi(k) * rescaled.residual_form - original.residual_form).abs(),
        conformal_defect: (sf * sf * rescaled.residual_conformal - original.residual_conformal).abs(),
        verdicts_preserved: a.form == b.form && a.conformal == b.conformal && a.smith == b.smith && original.critical == rescaled.critical,
        original,
        rescaled,
    })
}

/// Defects of the parallel-calibration identities at a Smith point.
#[derive(Clone, Debug, Serialize)]
pub struct NablaReport {
    /// Immersion: |u*(∇_V α)| on the unit k-vector of L.
    /// Submersion: |(∇_X α)| on the unit vertical (n−k)-vector.
    pub nabla_defect: f64,
    /// Submersion only: ‖(⋆α)^{(1,k−1)}‖.
    pub mixed_type_norm: Option<f64>,
}

/// Applies only where the problem is Smith; V lives on M at u(x) for immersions
/// and at x for submersions.
pub fn pullback_nabla_check<T: Scalar>(prob: &SmithProblem<T>, v: &DVector<T>, x: &[T]) -> Result<NablaReport> {
    let rep = residual(prob, x)?;
    if !rep.verdicts.smith {
        return Err(Error::Precondition(format!(
            "not Smith at this point (form residual {:e}, conformal residual {:e})",
            rep.residual_form, rep.residual_conformal
        )));
    }
    let pd = prob.point(x)?;
    if v.len() != prob.n() {
        return Err(Error::Dimension(format!("V must have {} components", prob.n())));
    }
    match prob.direction {
        Direction::Immersion => {
            let metric = prob.target_metric.as_ref();
            let nabla = covariant_derivative_form(prob.calibration.as_ref(), metric, v, &pd.jet.u, &prob.fd)?;
            let pulled = nabla.rebase(&pd.target)?.pullback_matrix(&pd.jet.jacobian, &pd.source)?;
            let val = pulled.coeffs()[0] / KForm::volume(&pd.source).coeffs()[0];
            Ok(NablaReport { nabla_defect: val.abs().to_f64_lossy(), mixed_type_norm: None })
        }
        Direction::Submersion => {
            let split = horizontal_split(&pd.jet.jacobian, &pd.source, &pd.target, T::lit(prob.tolerances.rank))?;
            let Split::Regular(fr) = split else {
                return Err(Error::Precondition("du does not have maximal rank".into()));
            };
            let k = prob.k();
            let parts = fr.type_decompose(&pd.alpha.hodge_star())?;
            let mixed = parts.get(&(1, k - 1)).map_or(T::zero(), KForm::norm);
            let metric = prob.source_metric.as_ref();
            let nabla = covariant_derivative_form(prob.calibration.as_ref(), metric, v, x, &prob.fd)?;
            let val = nabla.rebase(&pd.source)?.pair(&fr.vertical_unit())?;
            Ok(NablaReport { nabla_defect: val.abs().to_f64_lossy(), mixed_type_norm: Some(mixed.to_f64_lossy()) })
        }
    }
}

/// The three conditions that are equivalent for a horizontally conformal map
/// at a point of maximal rank, each as a nonnegative defect.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KernelCalibration {
    /// |u*vol_L − λᵏ(⋆α)^{(0,k)}| / λᵏ on the horizontal unit k-vector.
    pub pullback_volume: f64,
    /// 1 − ⋆α(horizontal unit).
    pub horizontal_calibrated: f64,
    /// 1 − α(vertical unit).
    pub kernel_calibrated: f64,
    /// Horizontal conformality residual; the equivalence presumes it is small.
    pub conformal: f64,
}

impl KernelCalibration {
    /// True when all three defects are on the same side of `tol`.
    pub fn consistent(&self, tol: f64) -> bool {
        let a = self.pullback_volume <= tol;
        let b = self.horizontal_calibrated <= tol;
        let c = self.kernel_calibrated <= tol;
        a == b && b == c
    }
}

pub fn kernel_calibration_conditions<T: Scalar>(pd: &PointData<T>, tol: &Tolerances) -> Result<KernelCalibration> {
    let (du, m, l) = (&pd.jet.jacobian, &pd.source, &pd.target);
    let split = horizontal_split(du, m, l, T::lit(tol.rank))?;
    let Split::Regular(fr) = split else {
        return Err(Error::Precondition("du does not have maximal rank".into()));
    };
    let k = l.dim();
    let lam = dilation(du, &m.metric(), &l.metric())?;
    let lamk = lam.powi(k as i32);
    let eh = fr.horizontal_unit();
    let pulled = KForm::volume(l).pullback_matrix(du, m)?;
    let star = pd.alpha.hodge_star();
    let sh = star.pair(&eh)?;
    let conf = du.transpose() * l.metric() * du - fr.h02() * (lam * lam);
    let conf = crate::linalg::frob(&crate::linalg::in_orthonormal_frame(&conf, &m.cholesky()));
    Ok(KernelCalibration {
        pullback_volume: ((pulled.pair(&eh)? - lamk * sh).abs() / lamk).to_f64_lossy(),
        horizontal_calibrated: (T::one() - sh).to_f64_lossy(),
        kernel_calibrated: (T::one() - pd.alpha.pair(&fr.vertical_unit())?).to_f64_lossy(),
        conformal: conf.to_f64_lossy(),
    })
}
