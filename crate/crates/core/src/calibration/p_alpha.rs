use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::{KForm, KVector};
use crate::geometry::SplitFrame;
use crate::linalg;
use crate::scalar::Scalar;

/// P_α(w): the vector with ⟨P_α(w), v⟩ = α(w ∧ v).
pub fn p_alpha<T: Scalar>(alpha: &KForm<T>, w: &KVector<T>) -> Result<DVector<T>> {
    let k = alpha.degree();
    if k == 0 || w.degree() + 1 != k || w.dim() != alpha.dim() {
        return Err(Error::Degree(format!("P_α of a {}-form needs a {}-vector", k, k.saturating_sub(1))));
    }
    let n = alpha.dim();
    let mut c = DVector::zeros(n);
    for j in 0..n {
        let ej = KVector::basis(w.space(), &[j])?;
        c[j] = alpha.pair(&w.wedge(&ej)?)?;
    }
    Ok(alpha.space().inverse_metric() * c)
}

/// P_α^⊤(v) = (−1)^{k−1} (v ⌟ α)^♯.
pub fn p_alpha_adjoint<T: Scalar>(alpha: &KForm<T>, v: &DVector<T>) -> Result<KVector<T>> {
    let k = alpha.degree();
    let c = alpha.interior(v)?.raise();
    Ok(if (k - 1).is_multiple_of(2) { c } else { c.scale(-T::one()) })
}

/// Operator defect ‖P_α P_α^⊤ − |α|² π_H‖ (spectral norm in an orthonormal frame)
/// for a form of type (0,k) with respect to `split`.
pub fn pp_top_check<T: Scalar>(alpha: &KForm<T>, split: &SplitFrame<T>, tol: T) -> Result<T> {
    let k = alpha.degree();
    let parts = split.type_decompose(alpha)?;
    let scale = alpha.norm().max(T::one());
    for ((p, q), part) in &parts {
        if (*p, *q) != (0, k) && part.norm() > tol * scale {
            return Err(Error::Precondition(format!(
                "form has a ({p},{q}) component of norm {:e}; type (0,{k}) required",
                part.norm().to_f64_lossy()
            )));
        }
    }
    if k == 0 {
        return Err(Error::Degree("P_α needs degree ≥ 1".into()));
    }
    let basis = split.frame_matrix();
    let n = basis.ncols();
    let g = alpha.space().metric();
    let pi_h = split.horizontal_projector();
    let a2 = alpha.norm_sq();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let b = basis.column(j).into_owned();
        let img = p_alpha(alpha, &p_alpha_adjoint(alpha, &b)?)? - (&pi_h * &b) * a2;
        for i in 0..n {
            m[(i, j)] = linalg::inner(&basis.column(i).into_owned(), &img, &g);
        }
    }
    Ok(m.singular_values().max())
}
