use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::calibration::{standard_form, StandardCalibration};
use crate::error::{Error, Result};
use crate::geometry::{ChartDomain, ConstantForm, Euclidean, FnMap, MapJet};
use crate::scalar::Scalar;
use crate::smith::{Direction, SmithProblem};

/// Registry entry for a flat-torus Smith map.
///
/// The map is linear plus the perturbation
/// u^a += ε sin(x_s), u^b += ε cos(x_s),
/// which breaks conformality (immersions) or pushes the kernel off the
/// calibrated plane (submersions) at every point once ε ≠ 0.
#[derive(Clone, Debug, Serialize)]
pub struct FlatModel {
    pub name: &'static str,
    pub direction: Direction,
    pub source_dim: usize,
    pub target_dim: usize,
    pub calibration: StandardCalibration,
    pub description: &'static str,
    /// For each source axis, the target axis it is sent to (None for kernel axes).
    #[serde(skip)]
    image_of: &'static [Option<usize>],
    pub perturbed_targets: [usize; 2],
    pub perturbation_axis: usize,
    /// Source axes the jet depends on, padded to k axes; grids over them are
    /// exact for the whole torus.
    pub sample_axes: Vec<usize>,
}

impl FlatModel {
    pub fn k(&self) -> usize {
        self.source_dim.min(self.target_dim)
    }

    /// 0-based linear part as a target × source matrix.
    pub fn linear_part<T: Scalar>(&self) -> DMatrix<T> {
        let mut a = DMatrix::zeros(self.target_dim, self.source_dim);
        for (j, t) in self.image_of.iter().enumerate() {
            if let Some(t) = t {
                a[(*t, j)] = T::one();
            }
        }
        a
    }

    /// Regular grid with `n` points per sample axis on [0, 2π); other axes at 0.
    pub fn sample_grid<T: Scalar>(&self, n: usize) -> Vec<Vec<T>> {
        let axes = &self.sample_axes;
        let total = n.pow(axes.len() as u32);
        (0..total)
            .map(|mut idx| {
                let mut x = vec![T::zero(); self.source_dim];
                for &a in axes {
                    x[a] = T::lit(std::f64::consts::TAU * (idx % n) as f64 / n as f64);
                    idx /= n;
                }
                x
            })
            .collect()
    }
}

const CL: &[Option<usize>] = &[Some(0), Some(1)];
const SL: &[Option<usize>] = &[Some(0), Some(2), Some(4)];
const AS: &[Option<usize>] = &[Some(0), Some(1), Some(2)];
const CO: &[Option<usize>] = &[Some(0), Some(1), Some(2), None, None, None, None];
const CY: &[Option<usize>] = &[None, None, None, None, Some(0), Some(1), Some(2), Some(3)];
const KF: &[Option<usize>] = &[Some(0), Some(1), None, None];

/// All registry models.
pub fn registry() -> Vec<FlatModel> {
    vec![
        FlatModel {
            name: "complex-line-T4",
            direction: Direction::Immersion,
            source_dim: 2,
            target_dim: 4,
            calibration: StandardCalibration::Kaehler,
            description: "coordinate complex line T² → T⁴, calibrated by ω",
            image_of: CL,
            perturbed_targets: [2, 3],
            perturbation_axis: 0,
            sample_axes: vec![0, 1],
        },
        FlatModel {
            name: "slag-plane-T6",
            direction: Direction::Immersion,
            source_dim: 3,
            target_dim: 6,
            calibration: StandardCalibration::SpecialLagrangian,
            description: "real 3-torus span(e₁,e₃,e₅) in T⁶, calibrated by Re Υ",
            image_of: SL,
            perturbed_targets: [1, 3],
            perturbation_axis: 0,
            sample_axes: vec![0, 1, 2],
        },
        FlatModel {
            name: "associative-T7",
            direction: Direction::Immersion,
            source_dim: 3,
            target_dim: 7,
            calibration: StandardCalibration::Associative,
            description: "associative 3-torus span(e₁,e₂,e₃) in T⁷, calibrated by φ₀",
            image_of: AS,
            perturbed_targets: [3, 4],
            perturbation_axis: 0,
            sample_axes: vec![0, 1, 2],
        },
        FlatModel {
            name: "coassoc-fibration-T7",
            direction: Direction::Submersion,
            source_dim: 7,
            target_dim: 3,
            calibration: StandardCalibration::Coassociative,
            description: "projection T⁷ → T³ with coassociative fibres span(e₄,…,e₇), calibrated by ψ₀",
            image_of: CO,
            perturbed_targets: [0, 1],
            perturbation_axis: 3,
            sample_axes: vec![3],
        },
        FlatModel {
            name: "cayley-fibration-T8",
            direction: Direction::Submersion,
            source_dim: 8,
            target_dim: 4,
            calibration: StandardCalibration::Cayley,
            description: "projection T⁸ → T⁴ onto x₅…x₈ with Cayley fibres span(e₁,…,e₄), calibrated by Φ₀",
            image_of: CY,
            perturbed_targets: [0, 1],
            perturbation_axis: 0,
            sample_axes: vec![0],
        },
        FlatModel {
            name: "kaehler-fibration-T4",
            direction: Direction::Submersion,
            source_dim: 4,
            target_dim: 2,
            calibration: StandardCalibration::Kaehler,
            description: "projection T⁴ → T² with complex fibres span(e₃,e₄), calibrated by ω",
            image_of: KF,
            perturbed_targets: [0, 1],
            perturbation_axis: 2,
            sample_axes: vec![2],
        },
    ]
}

pub fn model_info(name: &str) -> Result<FlatModel> {
    registry()
        .into_iter()
        .find(|m| m.name == name)
        .ok_or_else(|| Error::UnknownModel(name.to_string()))
}

/// The registry model as a problem on the flat torus, perturbed by `eps`.
pub fn flat_model<T: Scalar>(name: &str, eps: T) -> Result<SmithProblem<T>> {
    let info = model_info(name)?;
    let (n1, n2) = (info.source_dim, info.target_dim);
    let n = n1.max(n2);
    let alpha = standard_form::<T>(info.calibration, n)?.form;
    let a = info.linear_part::<T>();
    let s = info.perturbation_axis;
    let [ta, tb] = info.perturbed_targets;
    let map = FnMap::new(n1, n2, move |x: &[T]| {
        let (sn, cs) = (x[s].sin(), x[s].cos());
        let mut u: Vec<T> = (0..n2).map(|r| (0..n1).fold(T::zero(), |acc, c| acc + a[(r, c)] * x[c])).collect();
        u[ta] += eps * sn;
        u[tb] += eps * cs;
        let mut jac = a.clone();
        jac[(ta, s)] += eps * cs;
        jac[(tb, s)] -= eps * sn;
        let mut hess = vec![DMatrix::zeros(n1, n1); n2];
        hess[ta][(s, s)] = -eps * sn;
        hess[tb][(s, s)] = -eps * cs;
        MapJet { x: x.to_vec(), u, jacobian: jac, hessian: Some(hess) }
    });
    let label = if eps == T::zero() { name.to_string() } else { format!("{name} (ε = {})", eps.to_f64_lossy()) };
    Ok(SmithProblem::new(
        info.direction,
        Arc::new(map),
        Arc::new(Euclidean(n1)),
        Arc::new(Euclidean(n2)),
        Arc::new(ConstantForm(alpha)),
    )?
    .named(label)
    .with_domain(ChartDomain::torus(n1)))
}

/// One line of the `models.json` manifest.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub direction: Direction,
    pub source_dim: usize,
    pub target_dim: usize,
    pub calibration: String,
    pub description: String,
}

pub fn manifest() -> Vec<ManifestEntry> {
    registry()
        .into_iter()
        .map(|m| ManifestEntry {
            name: m.name.into(),
            direction: m.direction,
            source_dim: m.source_dim,
            target_dim: m.target_dim,
            calibration: m.calibration.to_string(),
            description: m.description.into(),
        })
        .collect()
}
