use nalgebra::{DMatrix, DVector};

use super::christoffel::{christoffel, metric_derivatives, Christoffel};
use super::fd::{partial, FdConfig};
use super::jet::{MapField, MapJet};
use super::metric::MetricField;
use crate::error::{Error, Result};
use crate::exterior::{index::binomial, minors_matrix, ExtSpace, KForm, KVector};
use crate::linalg;
use crate::scalar::Scalar;

/// Section of T*M₁ ⊗ u*TM₂ as an n₂×n₁ matrix field B(x)^a_j.
pub type MixedField<'a, T> = dyn Fn(&[T]) -> DMatrix<T> + Sync + 'a;

/// (Div B)^a = g^{ij}(∂_i B^a_j − Γ^l_{ij} B^a_l + Γ̃^a_{bc}(u) ∂_i u^b B^c_j).
pub fn divergence_mixed<T: Scalar>(
    b: &MixedField<'_, T>,
    u: &dyn MapField<T>,
    g1: &dyn MetricField<T>,
    g2: &dyn MetricField<T>,
    x: &[T],
    fd: &FdConfig<T>,
) -> Result<DVector<T>> {
    let n1 = u.source_dim();
    let n2 = u.target_dim();
    let jet = u.jet(x);
    let b0 = b(x);
    if b0.shape() != (n2, n1) {
        return Err(Error::Dimension(format!("B is {}x{}, expected {n2}x{n1}", b0.nrows(), b0.ncols())));
    }
    let ginv = linalg::spd_inverse(&g1.eval(x))?;
    let gamma = christoffel(g1, x, fd)?;
    let gamma_t = christoffel(g2, &jet.u, fd)?;
    let flat = |y: &[T]| b(y).as_slice().to_vec();
    let db: Vec<DMatrix<T>> =
        (0..n1).map(|i| DMatrix::from_column_slice(n2, n1, &partial(&flat, x, i, fd.h2, fd.richardson))).collect();
    Ok(assemble_divergence(&db, &b0, &ginv, &gamma, &gamma_t, &jet.jacobian))
}

fn assemble_divergence<T: Scalar>(
    db: &[DMatrix<T>],
    b0: &DMatrix<T>,
    ginv: &DMatrix<T>,
    gamma: &Christoffel<T>,
    gamma_t: &Christoffel<T>,
    du: &DMatrix<T>,
) -> DVector<T> {
    let n1 = b0.ncols();
    let n2 = b0.nrows();
    let mut out = DVector::zeros(n2);
    for i in 0..n1 {
        // Γ̃(∂_i u) as a matrix [a][c]
        let dui: Vec<T> = (0..n2).map(|b| du[(b, i)]).collect();
        let gt = gamma_t.contract(&dui);
        for j in 0..n1 {
            let w = ginv[(i, j)];
            if w == T::zero() {
                continue;
            }
            for a in 0..n2 {
                let mut s = db[i][(a, j)];
                for l in 0..n1 {
                    s -= gamma.get(l, i, j) * b0[(a, l)];
                }
                for c in 0..n2 {
                    s += gt[(a, c)] * b0[(c, j)];
                }
                out[a] += w * s;
            }
        }
    }
    out
}

/// τ_p = Div(|du|^{p−2} du) from a single jet carrying second derivatives;
/// metric derivatives are still differenced.
pub fn p_tension_from_jet<T: Scalar>(
    jet: &MapJet<T>,
    g1: &dyn MetricField<T>,
    g2: &dyn MetricField<T>,
    p: usize,
    fd: &FdConfig<T>,
) -> Result<DVector<T>> {
    let hess = jet.hessian.as_ref().ok_or_else(|| Error::MissingData("jet has no second derivatives".into()))?;
    let n1 = jet.source_dim();
    let n2 = jet.target_dim();
    let x = &jet.x;
    let du = &jet.jacobian;
    let g = g1.eval(x);
    let h = g2.eval(&jet.u);
    let ginv = linalg::spd_inverse(&g)?;
    let norm2 = (&ginv * du.transpose() * &h * du).trace();
    let pw = |e: f64| -> T {
        if p == 2 {
            T::one()
        } else {
            norm2.powf(T::lit(e))
        }
    };
    if p > 2 && norm2 == T::zero() && p < 4 {
        return Err(Error::Precondition("|du| = 0 where the p-tension is singular".into()));
    }
    let dg = metric_derivatives(g1, x, fd);
    let dh = metric_derivatives(g2, &jet.u, fd);
    // ∂_i |du|²
    let mut dnorm = vec![T::zero(); n1];
    if p != 2 {
        for (i, dn) in dnorm.iter_mut().enumerate() {
            let dginv = -(&ginv * &dg[i] * &ginv);
            let mut s = (&dginv * du.transpose() * &h * du).trace();
            let mut dhi = DMatrix::zeros(n2, n2);
            for c in 0..n2 {
                dhi += &dh[c] * du[(c, i)];
            }
            s += (&ginv * du.transpose() * &dhi * du).trace();
            let hi = DMatrix::from_fn(n2, n1, |a, j| hess[a][(i, j)]);
            s += (&ginv * hi.transpose() * &h * du).trace() * T::lit(2.0);
            *dn = s;
        }
    }
    let pf = T::of_usize(p);
    let coef = pw((p as f64 - 2.0) / 2.0);
    let dcoef = if p == 2 { T::zero() } else { (pf - T::lit(2.0)) / T::lit(2.0) * pw((p as f64 - 4.0) / 2.0) };
    let b0 = du * coef;
    let db: Vec<DMatrix<T>> = (0..n1)
        .map(|i| DMatrix::from_fn(n2, n1, |a, j| dcoef * dnorm[i] * du[(a, j)] + coef * hess[a][(i, j)]))
        .collect();
    let gamma = christoffel(g1, x, fd)?;
    let gamma_t = christoffel(g2, &jet.u, fd)?;
    Ok(assemble_divergence(&db, &b0, &ginv, &gamma, &gamma_t, du))
}

/// Field P_j(x) ∈ Λ^q T_xM, stored as a C(n,q)×n matrix whose column j is P_j.
pub type SkewField<'a, T> = dyn Fn(&[T]) -> DMatrix<T> + Sync + 'a;

/// Max deviation of P from total skew-symmetry after lowering all indices.
pub fn skew_defect<T: Scalar>(p: &DMatrix<T>, space: &ExtSpace<T>, q: usize) -> Result<T> {
    let n = space.dim();
    let lowered: Vec<KForm<T>> = (0..n)
        .map(|j| Ok(KVector::from_coeffs(space, q, p.column(j).iter().copied().collect())?.lower()))
        .collect::<Result<_>>()?;
    // R = (q+1)⁻¹ Σ_j e^j ∧ Q_j; skew iff Q_j = e_j ⌟ R for every j
    let mut r = KForm::zero(space, q + 1);
    for (j, qj) in lowered.iter().enumerate() {
        let ej = KForm::basis(space, &[j])?;
        r = &r + &ej.wedge(qj)?;
    }
    let r = r.scale(T::one() / T::of_usize(q + 1));
    let mut d = T::zero();
    for (j, qj) in lowered.iter().enumerate() {
        let ej = DVector::from_fn(n, |i, _| if i == j { T::one() } else { T::zero() });
        d = d.max(r.interior(&ej)?.max_abs_diff(qj));
    }
    Ok(d)
}

/// ‖Div(Λ^q(du) P) − Λ^q(du)(Div P)‖ at x, both sides by finite differences.
pub fn div_lambda_commute_check<T: Scalar>(
    p: &SkewField<'_, T>,
    u: &dyn MapField<T>,
    g_m: &dyn MetricField<T>,
    g_l: &dyn MetricField<T>,
    q: usize,
    x: &[T],
    fd: &FdConfig<T>,
) -> Result<T> {
    let n = u.source_dim();
    let m = u.target_dim();
    let p0 = p(x);
    if p0.shape() != (binomial(n, q), n) {
        return Err(Error::Dimension(format!("P must be {}x{n}", binomial(n, q))));
    }
    let space = ExtSpace::with_metric(g_m.eval(x), Default::default())?;
    let sd = skew_defect(&p0, &space, q)?;
    if sd > T::lit(1e-10) * linalg::max_abs(&p0).max(T::one()) {
        return Err(Error::Precondition(format!("P is not totally skew (defect {:e})", sd.to_f64_lossy())));
    }
    let jet = u.jet(x);
    let ginv = linalg::spd_inverse(&g_m.eval(x))?;
    let gamma = christoffel(g_m, x, fd)?;
    let gamma_t = christoffel(g_l, &jet.u, fd)?;
    let flat_n = ExtSpace::euclidean(n);
    let flat_m = ExtSpace::euclidean(m);

    // A_j(y) = Λ^q(du(y)) P_j(y)
    let a_field = |y: &[T]| -> Vec<T> { (minors_matrix(&u.jet(y).jacobian, q) * p(y)).as_slice().to_vec() };
    let dq = binomial(m, q);
    let a0 = DMatrix::from_column_slice(dq, n, &a_field(x));
    let mut lhs = DVector::zeros(dq);
    let mut div_p = DVector::zeros(binomial(n, q));
    let pfield = |y: &[T]| p(y).as_slice().to_vec();
    for i in 0..n {
        let da = DMatrix::from_column_slice(dq, n, &partial(&a_field, x, i, fd.h2, fd.richardson));
        let dp = DMatrix::from_column_slice(binomial(n, q), n, &partial(&pfield, x, i, fd.h2, fd.richardson));
        let dui: Vec<T> = (0..m).map(|b| jet.jacobian[(b, i)]).collect();
        let gt = gamma_t.contract(&dui);
        let gi = gamma.along(i);
        for j in 0..n {
            let w = ginv[(i, j)];
            if w == T::zero() {
                continue;
            }
            let mut col = da.column(j).into_owned();
            let mut pcol = dp.column(j).into_owned();
            for l in 0..n {
                let c = gamma.get(l, i, j);
                col -= a0.column(l) * c;
                pcol -= p0.column(l) * c;
            }
            let aj = KVector::from_coeffs(&flat_m, q, a0.column(j).iter().copied().collect())?;
            col += DVector::from_column_slice(aj.derivation(&gt).coeffs());
            let pj = KVector::from_coeffs(&flat_n, q, p0.column(j).iter().copied().collect())?;
            pcol += DVector::from_column_slice(pj.derivation(&gi).coeffs());
            lhs += col * w;
            div_p += pcol * w;
        }
    }
    let rhs = minors_matrix(&jet.jacobian, q) * div_p;
    Ok((lhs - rhs).norm())
}
