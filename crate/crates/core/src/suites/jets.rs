//! Random jets for the property suites: generic jets, and Smith jets built by
//! moving a calibrated coordinate plane through random coordinate changes.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::calibration::{standard_form, StandardCalibration};
use crate::error::Result;
use crate::exterior::{ExtSpace, KForm, Orientation};
use crate::geometry::MapJet;
use crate::smith::{Direction, PointData};

/// A standard calibration on ℝⁿ used as a suite case.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CalibrationCase {
    pub kind: StandardCalibration,
    pub n: usize,
}

impl CalibrationCase {
    pub fn degree(&self) -> usize {
        self.kind.degree(self.n)
    }

    /// k = dim L for the given direction.
    pub fn k(&self, direction: Direction) -> usize {
        match direction {
            Direction::Immersion => self.degree(),
            Direction::Submersion => self.n - self.degree(),
        }
    }

    pub fn label(&self) -> String {
        format!("{} on R^{}", self.kind, self.n)
    }
}

/// Every standard calibration with n ≤ 8.
pub fn calibration_cases() -> Vec<CalibrationCase> {
    use StandardCalibration::*;
    let c = |kind, n| CalibrationCase { kind, n };
    vec![
        c(Kaehler, 4),
        c(Kaehler, 6),
        c(Kaehler, 8),
        c(KaehlerPower(2), 6),
        c(KaehlerPower(2), 8),
        c(KaehlerPower(3), 8),
        c(SpecialLagrangian, 4),
        c(SpecialLagrangian, 6),
        c(SpecialLagrangian, 8),
        c(Associative, 7),
        c(Coassociative, 7),
        c(Cayley, 8),
    ]
}

/// Orthonormal columns spanning a coordinate plane calibrated by the standard form.
pub fn calibrated_coordinate_plane(case: CalibrationCase) -> DMatrix<f64> {
    use StandardCalibration::*;
    let axes: Vec<usize> = match case.kind {
        Kaehler => vec![0, 1],
        KaehlerPower(p) => (0..2 * p).collect(),
        SpecialLagrangian => (0..case.n / 2).map(|j| 2 * j).collect(),
        Associative => vec![0, 1, 2],
        Coassociative => vec![3, 4, 5, 6],
        Cayley => vec![0, 1, 2, 3],
    };
    DMatrix::from_fn(case.n, axes.len(), |i, j| if i == axes[j] { 1.0 } else { 0.0 })
}

pub fn gauss(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

pub fn gauss_mat(r: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| gauss(r))
}

pub fn gauss_vec(r: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| gauss(r))
}

/// Well-conditioned matrix with positive determinant: U·diag(e^{0.3gᵢ})·V with
/// U, V random rotations, so the condition number stays moderate in every dimension.
pub fn random_gl_plus(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let u = random_rotation(r, n);
    let v = random_rotation(r, n);
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| (0.3 * gauss(r)).exp()));
    u * d * v
}

/// Haar-random rotation from the QR of a Gaussian matrix.
pub fn random_rotation(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let qr = gauss_mat(r, n, n).qr();
    let (mut q, rr) = (qr.q(), qr.r());
    for j in 0..n {
        if rr[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Pointwise data of a jet with constant metrics: g on L, h on M, α on M.
#[derive(Clone, Debug)]
pub struct JetCase {
    pub direction: Direction,
    pub du: DMatrix<f64>,
    /// Metric of L.
    pub g: DMatrix<f64>,
    /// Metric of M.
    pub h: DMatrix<f64>,
    /// α coefficients on Euclidean ℝⁿ.
    pub alpha: KForm<f64>,
}

impl JetCase {
    pub fn point_data(&self) -> Result<PointData<f64>> {
        let l = ExtSpace::with_metric(self.g.clone(), Orientation::Positive)?;
        let m = ExtSpace::with_metric(self.h.clone(), Orientation::Positive)?;
        let (source, target) = match self.direction {
            Direction::Immersion => (l, m),
            Direction::Submersion => (m, l),
        };
        let (n1, n2) = (source.dim(), target.dim());
        let alpha = match self.direction {
            Direction::Immersion => self.alpha.rebase(&target)?,
            Direction::Submersion => self.alpha.rebase(&source)?,
        };
        let jet = MapJet { x: vec![0.0; n1], u: vec![0.0; n2], jacobian: self.du.clone(), hessian: None };
        Ok(PointData { jet, source, target, alpha })
    }
}

/// Random metrics h = BᵀB on M and g = CᵀC on L with α = B*α₀; returns (B, C, case).
fn random_geometry(r: &mut ChaCha8Rng, case: CalibrationCase, direction: Direction) -> (DMatrix<f64>, DMatrix<f64>, JetCase) {
    let n = case.n;
    let k = case.k(direction);
    let alpha0 = standard_form::<f64>(case.kind, n).expect("listed case").form;
    let b = random_gl_plus(r, n);
    let c = random_gl_plus(r, k);
    let alpha = alpha0.pullback_matrix(&b, &ExtSpace::euclidean(n)).expect("square");
    let jc = JetCase {
        direction,
        du: DMatrix::zeros(0, 0),
        g: c.transpose() * &c,
        h: b.transpose() * &b,
        alpha,
    };
    (b, c, jc)
}

/// Gaussian du against random metrics and a transported standard calibration.
pub fn random_jet(r: &mut ChaCha8Rng, case: CalibrationCase, direction: Direction) -> JetCase {
    let (_, _, mut jc) = random_geometry(r, case, direction);
    let (n, k) = (case.n, case.k(direction));
    jc.du = match direction {
        Direction::Immersion => gauss_mat(r, n, k),
        Direction::Submersion => gauss_mat(r, k, n),
    };
    jc
}

/// A Smith jet: conformal with random dilation, image (immersion) or kernel
/// (submersion) the transported calibrated coordinate plane.
///
/// In the Euclidean picture du₀ = c·P·Q·C (immersion) or c·C⁻¹·Q·Hᵀ (submersion),
/// with P the calibrated plane, H its oriented complement, Q a rotation and
/// g = CᵀC; the coordinate change y = Bz then gives du = B⁻¹du₀ or du₀B.
pub fn smith_jet(r: &mut ChaCha8Rng, case: CalibrationCase, direction: Direction) -> JetCase {
    let p = calibrated_coordinate_plane(case);
    conformal_jet_with_plane(r, case, direction, &p)
}

/// Conformal jet whose image or kernel is a uniformly random plane; Smith only
/// when that plane happens to be calibrated.
pub fn conformal_jet(r: &mut ChaCha8Rng, case: CalibrationCase, direction: Direction) -> JetCase {
    let rot = random_rotation(r, case.n);
    let p = rot * calibrated_coordinate_plane(case);
    conformal_jet_with_plane(r, case, direction, &p)
}

fn conformal_jet_with_plane(r: &mut ChaCha8Rng, case: CalibrationCase, direction: Direction, p: &DMatrix<f64>) -> JetCase {
    let (b, c, mut jc) = random_geometry(r, case, direction);
    let k = case.k(direction);
    let scale = (0.5 * gauss(r)).exp();
    let q = random_rotation(r, k);
    jc.du = match direction {
        Direction::Immersion => {
            let du0 = p * &q * &c * scale;
            b.clone().try_inverse().expect("invertible") * du0
        }
        Direction::Submersion => {
            let hor = oriented_complement(p);
            let cinv = c.clone().try_inverse().expect("invertible");
            cinv * q * hor.transpose() * &b * scale
        }
    };
    jc
}

/// Orthonormal complement H of the columns of P with det[P | H] = +1.
pub fn oriented_complement(p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    let m = p.ncols();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for i in 0..n {
        let mut v = DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
        for _ in 0..2 {
            for j in 0..m {
                let pj = p.column(j);
                v -= pj * pj.dot(&v);
            }
            for w in &cols {
                let d = w.dot(&v);
                v -= w * d;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / nv);
        }
        if cols.len() == n - m {
            break;
        }
    }
    let mut hor = DMatrix::from_columns(&cols);
    let mut full = p.clone().resize_horizontally(n, 0.0);
    full.columns_mut(m, n - m).copy_from(&hor);
    if full.determinant() < 0.0 {
        hor.column_mut(0).neg_mut();
    }
    hor
}
