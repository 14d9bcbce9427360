use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::problem::{Direction, PointData, SmithProblem, Tolerances};
use crate::calibration::p_alpha;
use crate::error::{Error, Result};
use crate::exterior::{minors_matrix, ExtSpace, KForm, KVector};
use crate::geometry::{du_norm_sq, horizontal_split, Split};
use crate::linalg;
use crate::scalar::Scalar;

/// Pass/fail flags of one report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub form: bool,
    pub conformal: bool,
    pub slack: bool,
    pub alt: bool,
    /// Small form residual forces small conformal residual (budget `coupling`).
    pub implication: bool,
    /// The two submersion formulations agree; always true for immersions.
    pub formulations_agree: bool,
    /// Both defining equations hold and du ≠ 0.
    pub smith: bool,
}

/// Residuals of the Smith equations at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub point: Vec<f64>,
    pub direction: Direction,
    pub lambda: f64,
    pub rank: usize,
    /// du = 0: every equation holds trivially and no verdict is issued.
    pub critical: bool,
    pub residual_form: f64,
    pub residual_conformal: f64,
    pub inequality_slack: f64,
    pub alt_residual: f64,
    /// α on the oriented image plane (immersion) or kernel (submersion), at maximal rank.
    pub plane_value: Option<f64>,
    /// |u*vol_L − λᵏ(⋆α)^{(0,k)}| on the horizontal unit k-vector (submersions at maximal rank).
    pub star_defect: Option<f64>,
    /// u*vol_L − λᵏ(⋆α)^{(0,k)} on the horizontal unit k-vector, reported when conformal.
    pub star_slack: Option<f64>,
    pub verdicts: Verdicts,
}

impl ResidualReport {
    /// A point passes when it is critical or every verdict holds.
    pub fn passes(&self) -> bool {
        let v = &self.verdicts;
        self.critical || (v.smith && v.slack && v.alt && v.implication && v.formulations_agree)
    }

    fn critical(point: Vec<f64>, direction: Direction) -> Self {
        ResidualReport {
            point,
            direction,
            lambda: 0.0,
            rank: 0,
            critical: true,
            residual_form: 0.0,
            residual_conformal: 0.0,
            inequality_slack: 0.0,
            alt_residual: 0.0,
            plane_value: None,
            star_defect: None,
            star_slack: None,
            verdicts: Verdicts {
                form: true,
                conformal: true,
                slack: true,
                alt: true,
                implication: true,
                formulations_agree: true,
                smith: false,
            },
        }
    }
}

fn f(x: impl Scalar) -> f64 {
    x.to_f64_lossy()
}

/// λ = |du|/√k with k = min(n₁, n₂).
pub fn dilation<T: Scalar>(du: &DMatrix<T>, g_at_x: &DMatrix<T>, h_at_u: &DMatrix<T>) -> Result<T> {
    let k = du.nrows().min(du.ncols());
    if k == 0 {
        return Err(Error::Dimension("empty differential".into()));
    }
    let n2 = du_norm_sq(du, g_at_x, h_at_u)?;
    Ok((n2.max(T::zero()) / T::of_usize(k)).sqrt())
}

/// Orthonormal frame of a space as columns (L⁻ᵀ for g = L Lᵀ), positively oriented.
fn oriented_frame<T: Scalar>(space: &ExtSpace<T>) -> DMatrix<T> {
    let mut e = space.cholesky().transpose().try_inverse().expect("Cholesky factor is invertible");
    if space.orientation().sign::<T>() < T::zero() {
        let mut c = e.column_mut(0);
        c.neg_mut();
    }
    e
}

fn spectral_norm<T: Scalar>(m: DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.singular_values().max()
}

/// ‖P_α ∘ Λ^{k−1}(du) ∘ ⋆_L − (−1)^{k−1} λ^{k−2} du‖ in orthonormal frames,
/// where λ^{k−2} = |du|^{k−2}/√k^{k−2}.
pub fn alt_immersion_defect<T: Scalar>(
    du: &DMatrix<T>,
    source: &ExtSpace<T>,
    target: &ExtSpace<T>,
    alpha: &KForm<T>,
) -> Result<T> {
    let k = source.dim();
    check_immersion_shapes(du, source, target, alpha)?;
    let lam = dilation(du, &source.metric(), &target.metric())?;
    if lam == T::zero() {
        return Ok(T::zero());
    }
    let coef = sign_pow::<T>(k - 1) * lam.powi(k as i32 - 2);
    let lk1 = minors_matrix(du, k - 1);
    let e = oriented_frame(source);
    let mut d = DMatrix::zeros(target.dim(), k);
    for i in 0..k {
        let ei = e.column(i).into_owned();
        let star = KVector::from_vector(source, &ei)?.hodge_star();
        let pushed = &lk1 * DVector::from_column_slice(star.coeffs());
        let pushed = KVector::from_coeffs(target, k - 1, pushed.as_slice().to_vec())?;
        let lhs = p_alpha(alpha, &pushed)?;
        d.set_column(i, &(lhs - du * &ei * coef));
    }
    Ok(spectral_norm(target.cholesky().transpose() * d))
}

/// ‖⋆_L Λ^{k−1}(du)(· ⌟ ⋆α) − (−1)^{k−1} λ^{k−2} du‖ in orthonormal frames.
pub fn alt_submersion_defect<T: Scalar>(
    du: &DMatrix<T>,
    source: &ExtSpace<T>,
    target: &ExtSpace<T>,
    alpha: &KForm<T>,
) -> Result<T> {
    check_submersion_shapes(du, source, target, alpha)?;
    let n = source.dim();
    let k = target.dim();
    let lam = dilation(du, &source.metric(), &target.metric())?;
    if lam == T::zero() {
        return Ok(T::zero());
    }
    let coef = sign_pow::<T>(k - 1) * lam.powi(k as i32 - 2);
    let star_alpha = alpha.hodge_star();
    let lk1 = minors_matrix(du, k - 1);
    let e = oriented_frame(source);
    let mut d = DMatrix::zeros(k, n);
    for i in 0..n {
        let v = e.column(i).into_owned();
        let c = star_alpha.interior(&v)?.raise();
        let pushed = &lk1 * DVector::from_column_slice(c.coeffs());
        let pushed = KVector::from_coeffs(target, k - 1, pushed.as_slice().to_vec())?;
        let lhs = pushed.hodge_star().to_vector()?;
        d.set_column(i, &(lhs - du * &v * coef));
    }
    Ok(spectral_norm(target.cholesky().transpose() * d))
}

fn sign_pow<T: Scalar>(p: usize) -> T {
    if p.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

fn check_immersion_shapes<T: Scalar>(du: &DMatrix<T>, l: &ExtSpace<T>, m: &ExtSpace<T>, alpha: &KForm<T>) -> Result<()> {
    if du.shape() != (m.dim(), l.dim()) {
        return Err(Error::Dimension(format!("du is {}x{}, expected {}x{}", du.nrows(), du.ncols(), m.dim(), l.dim())));
    }
    if alpha.dim() != m.dim() || alpha.degree() != l.dim() {
        return Err(Error::Degree(format!(
            "immersion of dimension {} needs a {}-form on ℝ^{}",
            l.dim(),
            l.dim(),
            m.dim()
        )));
    }
    Ok(())
}

fn check_submersion_shapes<T: Scalar>(du: &DMatrix<T>, m: &ExtSpace<T>, l: &ExtSpace<T>, alpha: &KForm<T>) -> Result<()> {
    if du.shape() != (l.dim(), m.dim()) {
        return Err(Error::Dimension(format!("du is {}x{}, expected {}x{}", du.nrows(), du.ncols(), l.dim(), m.dim())));
    }
    if l.dim() == 0 || l.dim() > m.dim() || alpha.dim() != m.dim() || alpha.degree() + l.dim() != m.dim() {
        return Err(Error::Degree(format!(
            "submersion ℝ^{} → ℝ^{} needs a {}-form on ℝ^{}",
            m.dim(),
            l.dim(),
            m.dim().saturating_sub(l.dim()),
            m.dim()
        )));
    }
    Ok(())
}

/// Residuals of u*α = λᵏ vol_L and u*h = λ²g at one jet.
pub fn immersion_report<T: Scalar>(pd: &PointData<T>, tol: &Tolerances) -> Result<ResidualReport> {
    let (du, l, m, alpha) = (&pd.jet.jacobian, &pd.source, &pd.target, &pd.alpha);
    check_immersion_shapes(du, l, m, alpha)?;
    let point: Vec<f64> = pd.jet.x.iter().map(|&v| f(v)).collect();
    let k = l.dim();
    let g = l.metric();
    let h = m.metric();
    let lam = dilation(du, &g, &h)?;
    if lam == T::zero() {
        return Ok(ResidualReport::critical(point, Direction::Immersion));
    }
    let lamk = lam.powi(k as i32);
    let pulled = alpha.pullback_matrix(du, l)?;
    let value = pulled.coeffs()[0] / KForm::volume(l).coeffs()[0];
    let slack = lamk - value;

    let lg = l.cholesky();
    let pb = linalg::in_orthonormal_frame(&(du.transpose() * &h * du), &lg);
    let conformal = linalg::frob(&(pb - DMatrix::identity(k, k) * (lam * lam)));

    let split = horizontal_split(du, l, m, T::lit(tol.rank))?;
    let rank = split.frame().map_or(0, |s| s.rank);
    let plane_value = if rank == k {
        let img = du * oriented_frame(l);
        let cols: Vec<DVector<T>> = (0..k).map(|j| img.column(j).into_owned()).collect();
        let frame = linalg::gram_schmidt(&cols, &h, T::lit(1e-12));
        if frame.len() == k {
            Some(f(alpha.evaluate(&frame)?))
        } else {
            None
        }
    } else {
        None
    };
    let alt = alt_immersion_defect(du, l, m, alpha)?;
    Ok(finish(
        point,
        Direction::Immersion,
        FinishInput { lam, rank, form: (lamk - value).abs(), conformal, slack, alt, plane_value, star: None },
        tol,
    ))
}

/// Residuals of α ∧ u*vol_L = λᵏ vol_M and u*g = λ²h^{(0,2)} at one jet,
/// with the alternative pair u*vol_L = λᵏ(⋆α)^{(0,k)}.
pub fn submersion_report<T: Scalar>(pd: &PointData<T>, tol: &Tolerances) -> Result<ResidualReport> {
    let (du, m, l, alpha) = (&pd.jet.jacobian, &pd.source, &pd.target, &pd.alpha);
    check_submersion_shapes(du, m, l, alpha)?;
    let point: Vec<f64> = pd.jet.x.iter().map(|&v| f(v)).collect();
    let k = l.dim();
    let h = m.metric();
    let g = l.metric();
    let lam = dilation(du, &h, &g)?;
    if lam == T::zero() {
        return Ok(ResidualReport::critical(point, Direction::Submersion));
    }
    let lamk = lam.powi(k as i32);
    let pulled_vol = KForm::volume(l).pullback_matrix(du, m)?;
    let top = alpha.wedge(&pulled_vol)?;
    let value = top.coeffs()[0] / KForm::volume(m).coeffs()[0];
    let slack = lamk - value;

    let split = horizontal_split(du, m, l, T::lit(tol.rank))?;
    let frame = split.frame().expect("not critical");
    let lh = m.cholesky();
    let conformal = linalg::frob(&linalg::in_orthonormal_frame(
        &(du.transpose() * &g * du - frame.h02() * (lam * lam)),
        &lh,
    ));
    let (plane_value, star) = match &split {
        Split::Regular(fr) => {
            let eh = fr.horizontal_unit();
            let ev = fr.vertical_unit();
            let a = pulled_vol.pair(&eh)?;
            let b = alpha.hodge_star().pair(&eh)?;
            (Some(f(alpha.pair(&ev)?)), Some(a - lamk * b))
        }
        _ => (None, None),
    };
    let alt = alt_submersion_defect(du, m, l, alpha)?;
    Ok(finish(
        point,
        Direction::Submersion,
        FinishInput { lam, rank: frame.rank, form: (lamk - value).abs(), conformal, slack, alt, plane_value, star },
        tol,
    ))
}

struct FinishInput<T> {
    lam: T,
    rank: usize,
    form: T,
    conformal: T,
    slack: T,
    alt: T,
    plane_value: Option<f64>,
    star: Option<T>,
}

fn finish<T: Scalar>(point: Vec<f64>, direction: Direction, r: FinishInput<T>, tol: &Tolerances) -> ResidualReport {
    let form = f(r.form);
    let conformal = f(r.conformal);
    let alt = f(r.alt);
    let form_ok = form <= tol.form;
    let conformal_ok = conformal <= tol.conformal;
    let implication = !form_ok || conformal <= tol.coupling * tol.form;
    let star_defect = r.star.map(|s| f(s.abs()));
    let formulations_agree = match star_defect {
        None => true,
        Some(sd) => {
            let forward = !(form_ok && conformal_ok) || sd <= tol.coupling * tol.form;
            let backward = !(sd <= tol.form && conformal_ok) || form <= tol.coupling * tol.form;
            forward && backward
        }
    };
    ResidualReport {
        point,
        direction,
        lambda: f(r.lam),
        rank: r.rank,
        critical: false,
        residual_form: form,
        residual_conformal: conformal,
        inequality_slack: f(r.slack),
        alt_residual: alt,
        plane_value: r.plane_value,
        star_defect,
        star_slack: if conformal_ok { r.star.map(f) } else { None },
        verdicts: Verdicts {
            form: form_ok,
            conformal: conformal_ok,
            slack: f(r.slack) >= -tol.slack,
            alt: alt <= tol.alt,
            implication,
            formulations_agree,
            smith: form_ok && conformal_ok,
        },
    }
}

fn require(prob_dir: Direction, want: Direction) -> Result<()> {
    if prob_dir != want {
        return Err(Error::Precondition(format!("problem is a {prob_dir}, not a {want}")));
    }
    Ok(())
}

pub fn immersion_residual<T: Scalar>(prob: &SmithProblem<T>, x: &[T]) -> Result<ResidualReport> {
    require(prob.direction, Direction::Immersion)?;
    immersion_report(&prob.point(x)?, &prob.tolerances)
}

pub fn submersion_residual<T: Scalar>(prob: &SmithProblem<T>, x: &[T]) -> Result<ResidualReport> {
    require(prob.direction, Direction::Submersion)?;
    submersion_report(&prob.point(x)?, &prob.tolerances)
}

/// Dispatch on the problem's direction.
pub fn residual<T: Scalar>(prob: &SmithProblem<T>, x: &[T]) -> Result<ResidualReport> {
    match prob.direction {
        Direction::Immersion => immersion_residual(prob, x),
        Direction::Submersion => submersion_residual(prob, x),
    }
}

pub fn alt_immersion_residual<T: Scalar>(prob: &SmithProblem<T>, x: &[T]) -> Result<T> {
    require(prob.direction, Direction::Immersion)?;
    let pd = prob.point(x)?;
    alt_immersion_defect(&pd.jet.jacobian, &pd.source, &pd.target, &pd.alpha)
}

pub fn alt_submersion_residual<T: Scalar>(prob: &SmithProblem<T>, x: &[T]) -> Result<T> {
    require(prob.direction, Direction::Submersion)?;
    let pd = prob.point(x)?;
    alt_submersion_defect(&pd.jet.jacobian, &pd.source, &pd.target, &pd.alpha)
}

/// Reports at many points, in input order.
pub fn sweep<T: Scalar>(prob: &SmithProblem<T>, points: &[Vec<T>]) -> Result<Vec<ResidualReport>> {
    points.par_iter().map(|x| residual(prob, x)).collect()
}
