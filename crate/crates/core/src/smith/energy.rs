use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::{Direction, PointData, SmithProblem};
use crate::error::{Error, Result};
use crate::exterior::KForm;
use crate::geometry::{closedness_defect, du_norm_sq};
use crate::scalar::Scalar;

/// Closedness threshold for spatially varying calibrations.
pub const CLOSED_TOL: f64 = 1e-6;

/// Tensor-product trapezoid rule on a periodic chart.
///
/// Only `axes` are sampled; the remaining coordinates are held at `base` and
/// contribute their full extent as a factor, which is exact when the integrand
/// does not depend on them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub points_per_axis: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<f64>>,
}

impl QuadratureSpec {
    pub fn new(points_per_axis: usize) -> Self {
        QuadratureSpec { points_per_axis, axes: None, base: None }
    }

    pub fn on_axes(mut self, axes: Vec<usize>) -> Self {
        self.axes = Some(axes);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    /// (1/√kᵏ)∫|du|ᵏ vol.
    pub energy: f64,
    /// ∫u*α for immersions, ∫α ∧ u*vol_L for submersions.
    pub lower_bound: f64,
    pub gap: f64,
    /// Change of energy plus bound when the grid is halved, plus a roundoff floor.
    pub quadrature_error: f64,
    pub points_per_axis: usize,
    pub axes: Vec<usize>,
}

impl EnergyReport {
    /// gap ≥ −quadrature_error.
    pub fn bound_holds(&self) -> bool {
        self.gap >= -self.quadrature_error
    }
}

/// Energy density and bound density at one point, in coordinate measure.
/// (1/√kᵏ)|du|ᵏ is λᵏ, so the energy density is λᵏ√det.
fn densities<T: Scalar>(pd: &PointData<T>, direction: Direction) -> Result<(T, T)> {
    let du = &pd.jet.jacobian;
    let (dom, cod) = (&pd.source, &pd.target);
    let k = du.nrows().min(du.ncols());
    let n2 = du_norm_sq(du, &dom.metric(), &cod.metric())?;
    let e = (n2.max(T::zero()) / T::of_usize(k)).powf(T::of_usize(k) / T::lit(2.0)) * dom.sqrt_det();
    let orient = dom.orientation().sign::<T>();
    let b = match direction {
        Direction::Immersion => pd.alpha.pullback_matrix(du, dom)?.coeffs()[0],
        Direction::Submersion => {
            let vol_l = KForm::volume(cod).pullback_matrix(du, dom)?;
            pd.alpha.wedge(&vol_l)?.coeffs()[0]
        }
    };
    Ok((e, b * orient))
}

fn grid_points(prob_dim: usize, lower: &[f64], extent: &[f64], axes: &[usize], base: &[f64], n: usize) -> Vec<Vec<f64>> {
    let total = n.pow(axes.len() as u32);
    (0..total)
        .map(|mut idx| {
            let mut x = base.to_vec();
            debug_assert_eq!(x.len(), prob_dim);
            for &a in axes {
                let j = idx % n;
                idx /= n;
                x[a] = lower[a] + extent[a] * j as f64 / n as f64;
            }
            x
        })
        .collect()
}

fn integrate<T: Scalar>(prob: &SmithProblem<T>, axes: &[usize], base: &[f64], n: usize) -> Result<(f64, f64)> {
    let d = prob.domain.dim();
    let extent: Vec<f64> = (0..d).map(|a| prob.domain.extent(a)).collect();
    let pts = grid_points(d, &prob.domain.lower, &extent, axes, base, n);
    let vals: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|x| {
            let xt: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
            let (e, b) = densities(&prob.point(&xt)?, prob.direction)?;
            Ok((e.to_f64_lossy(), b.to_f64_lossy()))
        })
        .collect::<Result<_>>()?;
    let mut w = 1.0;
    for a in 0..d {
        w *= if axes.contains(&a) { extent[a] / n as f64 } else { extent[a] };
    }
    let (mut e, mut b) = (0.0, 0.0);
    for (de, db) in vals {
        e += de;
        b += db;
    }
    Ok((e * w, b * w))
}

/// k-energy, its topological lower bound, and the gap between them.
pub fn k_energy<T: Scalar>(prob: &SmithProblem<T>, spec: &QuadratureSpec) -> Result<EnergyReport> {
    let d = prob.domain.dim();
    if !prob.domain.is_periodic() {
        return Err(Error::Precondition(
            "energy bound needs a closed (periodic) chart; the integral is not topological otherwise".into(),
        ));
    }
    let n = spec.points_per_axis;
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidInput("quadrature needs an even number ≥ 4 of points per axis".into()));
    }
    let axes = spec.axes.clone().unwrap_or_else(|| (0..d).collect());
    if axes.iter().any(|&a| a >= d) {
        return Err(Error::Dimension("quadrature axis out of range".into()));
    }
    let base = spec.base.clone().unwrap_or_else(|| prob.domain.lower.clone());
    if base.len() != d {
        return Err(Error::Dimension("quadrature base point has the wrong length".into()));
    }
    if !prob.calibration.is_constant() {
        let coarse = grid_points(d, &prob.domain.lower, &(0..d).map(|a| prob.domain.extent(a)).collect::<Vec<_>>(), &axes, &base, 2);
        let pts: Vec<Vec<T>> = coarse
            .iter()
            .map(|x| {
                let xt: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
                match prob.direction {
                    Direction::Immersion => prob.map.jet(&xt).u,
                    Direction::Submersion => xt,
                }
            })
            .collect();
        let defect = closedness_defect(prob.calibration.as_ref(), &pts, &prob.fd)?.to_f64_lossy();
        if defect > CLOSED_TOL {
            return Err(Error::Precondition(format!("calibration is not closed (|dα| ≈ {defect:e})")));
        }
    }
    let (e, b) = integrate(prob, &axes, &base, n)?;
    let (e2, b2) = integrate(prob, &axes, &base, n / 2)?;
    let floor = 1e-12 * (e.abs() + b.abs() + 1.0);
    Ok(EnergyReport {
        energy: e,
        lower_bound: b,
        gap: e - b,
        quadrature_error: (e - e2).abs() + (b - b2).abs() + floor,
        points_per_axis: n,
        axes,
    })
}
