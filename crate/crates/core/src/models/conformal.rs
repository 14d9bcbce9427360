use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exterior::{hadamard_check, LinearMap};
use crate::geometry::{ChartDomain, Composed, FnMap, MapField, MapJet};
use crate::scalar::Scalar;
use crate::smith::{Direction, SmithProblem};

/// Relative conformality tolerance for chart maps.
pub const CONFORMAL_TOL: f64 = 1e-10;

/// x ↦ c·x on ℝᵏ.
pub fn scaling<T: Scalar>(k: usize, c: T) -> FnMap<T> {
    FnMap::new(k, k, move |x: &[T]| MapJet {
        x: x.to_vec(),
        u: x.iter().map(|&v| v * c).collect(),
        jacobian: DMatrix::identity(k, k) * c,
        hessian: Some(vec![DMatrix::zeros(k, k); k]),
    })
}

/// z ↦ z² on ℝ² = ℂ.
pub fn complex_square<T: Scalar>() -> FnMap<T> {
    FnMap::new(2, 2, |p: &[T]| {
        let (x, y) = (p[0], p[1]);
        let two = T::lit(2.0);
        MapJet {
            x: p.to_vec(),
            u: vec![x * x - y * y, two * x * y],
            jacobian: DMatrix::from_row_slice(2, 2, &[two * x, -two * y, two * y, two * x]),
            hessian: Some(vec![
                DMatrix::from_row_slice(2, 2, &[two, T::zero(), T::zero(), -two]),
                DMatrix::from_row_slice(2, 2, &[T::zero(), two, two, T::zero()]),
            ]),
        }
    })
}

/// Precompose an immersion problem with an orientation-preserving conformal
/// chart map φ, checked at `samples`; the result lives on `domain`.
pub fn conformal_diffeo_compose<T: Scalar>(
    prob: &SmithProblem<T>,
    phi: Arc<dyn MapField<T>>,
    samples: &[Vec<T>],
    domain: ChartDomain,
) -> Result<SmithProblem<T>> {
    if prob.direction != Direction::Immersion {
        return Err(Error::Precondition("only immersions can be precomposed with a chart map".into()));
    }
    let k = prob.map.source_dim();
    if phi.source_dim() != k || phi.target_dim() != k || domain.dim() != k {
        return Err(Error::Dimension(format!("chart map must be ℝ^{k} → ℝ^{k}")));
    }
    if !prob.source_metric.is_constant() || prob.source_metric.eval(&vec![T::zero(); k]) != DMatrix::identity(k, k) {
        return Err(Error::Precondition("precomposition is implemented for a flat source chart".into()));
    }
    for x in samples {
        let d = phi.jet(x).jacobian;
        let det = d.determinant();
        if !(det > T::zero()) {
            return Err(Error::Precondition(format!("chart map is not orientation preserving (det {:e})", det.to_f64_lossy())));
        }
        let rep = hadamard_check(&LinearMap::euclidean(d))?;
        let scale = rep.norm_sq.max(T::lit(1e-300));
        if rep.conformal_defect > T::lit(CONFORMAL_TOL) * scale {
            return Err(Error::Precondition(format!(
                "chart map is not conformal (defect {:e})",
                rep.conformal_defect.to_f64_lossy()
            )));
        }
    }
    let composed = Composed { outer: prob.map.clone(), inner: phi };
    let mut out = prob.clone();
    out.map = Arc::new(composed);
    out.domain = domain;
    out.name = format!("{} ∘ conformal chart map", prob.name);
    Ok(out)
}
