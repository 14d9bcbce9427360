use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{index::subsets, ExtSpace, KForm, KVector};
use crate::linalg;
use crate::scalar::Scalar;

/// Default relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// Frame adapted to ker du ⊕ (ker du)^⊥, orthonormal for the domain metric.
#[derive(Clone, Debug)]
pub struct SplitFrame<T: Scalar> {
    space: ExtSpace<T>,
    pub vertical: Vec<DVector<T>>,
    pub horizontal: Vec<DVector<T>>,
    pub rank: usize,
    /// True when the horizontal frame was oriented by the target orientation.
    pub horizontal_oriented: bool,
}

/// Outcome of [`horizontal_split`].
#[derive(Clone, Debug)]
pub enum Split<T: Scalar> {
    /// du = 0.
    Critical,
    /// Maximal rank min(n₁, n₂).
    Regular(SplitFrame<T>),
    /// 0 < rank < min(n₁, n₂).
    Degenerate(SplitFrame<T>),
}

impl<T: Scalar> Split<T> {
    pub fn frame(&self) -> Option<&SplitFrame<T>> {
        match self {
            Split::Critical => None,
            Split::Regular(f) | Split::Degenerate(f) => Some(f),
        }
    }

    pub fn is_regular(&self) -> bool {
        matches!(self, Split::Regular(_))
    }
}

/// Split T_xM by the kernel of du.
///
/// `domain` is (ℝⁿ, h(x)) with the orientation of M and `target` is the target
/// tangent space at u(x) with its orientation. Singular values of du (measured
/// in orthonormal frames) below `rank_tol`·σ_max span the kernel.
pub fn horizontal_split<T: Scalar>(
    du: &DMatrix<T>,
    domain: &ExtSpace<T>,
    target: &ExtSpace<T>,
    rank_tol: T,
) -> Result<Split<T>> {
    let n = domain.dim();
    let m = target.dim();
    if du.shape() != (m, n) {
        return Err(Error::Dimension(format!("du is {}x{}, expected {m}x{n}", du.nrows(), du.ncols())));
    }
    let lh = domain.cholesky();
    let lg = target.cholesky();
    let from_hat = lh.transpose().try_inverse().expect("Cholesky factor is invertible");
    let ahat = lg.transpose() * du * &from_hat;
    // pad to a square matrix so the SVD returns a full right basis
    let size = n.max(m);
    let mut pad = DMatrix::zeros(size, n);
    pad.rows_mut(0, m).copy_from(&ahat);
    let svd = pad.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    if smax <= T::zero() {
        return Ok(Split::Critical);
    }
    let thresh = rank_tol * smax;
    let mut horiz_hat = Vec::new();
    let mut vert_hat = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let v = vt.row(i).transpose();
        if s > thresh {
            horiz_hat.push(v);
        } else {
            vert_hat.push(v);
        }
    }
    let rank = horiz_hat.len();
    // back to chart coordinates, then re-orthonormalize in h
    let g = domain.metric();
    let mut cols: Vec<DVector<T>> = vert_hat.iter().map(|v| &from_hat * v).collect();
    cols.extend(horiz_hat.iter().map(|v| &from_hat * v));
    let q = linalg::gram_schmidt(&cols, &g, T::lit(1e-10));
    if q.len() != n {
        return Err(Error::NotPositiveDefinite("split frame lost rank during orthonormalization".into()));
    }
    let mut vertical: Vec<DVector<T>> = q[..n - rank].to_vec();
    let mut horizontal: Vec<DVector<T>> = q[n - rank..].to_vec();

    let mut horizontal_oriented = false;
    if rank == m && rank > 0 {
        let img = du * DMatrix::from_columns(&horizontal);
        let s = img.determinant() * target.orientation().sign::<T>();
        if s < T::zero() {
            horizontal[0].neg_mut();
        }
        horizontal_oriented = true;
    }
    if !vertical.is_empty() {
        let mut all = vertical.clone();
        all.extend(horizontal.iter().cloned());
        let s = DMatrix::from_columns(&all).determinant() * domain.orientation().sign::<T>();
        if s < T::zero() {
            vertical[0].neg_mut();
        }
    }
    let frame = SplitFrame { space: domain.clone(), vertical, horizontal, rank, horizontal_oriented };
    Ok(if rank == n.min(m) { Split::Regular(frame) } else { Split::Degenerate(frame) })
}

/// Off-type defects from [`SplitFrame::interior_type_check`].
#[derive(Clone, Debug, Serialize)]
pub struct InteriorTypeReport<T: Scalar> {
    pub input_type: (usize, usize),
    /// Type of v^{(1,0)} ⌟ a, or `None` when p = 0 (the contraction must vanish).
    pub vertical_type: Option<(usize, usize)>,
    pub vertical_defect: T,
    pub horizontal_type: Option<(usize, usize)>,
    pub horizontal_defect: T,
}

impl<T: Scalar> SplitFrame<T> {
    pub fn space(&self) -> &ExtSpace<T> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Columns: vertical frame then horizontal frame.
    pub fn frame_matrix(&self) -> DMatrix<T> {
        let mut cols = self.vertical.clone();
        cols.extend(self.horizontal.iter().cloned());
        DMatrix::from_columns(&cols)
    }

    fn projector(&self, vs: &[DVector<T>]) -> DMatrix<T> {
        let n = self.dim();
        let g = self.space.metric();
        let mut p = DMatrix::zeros(n, n);
        for v in vs {
            p += v * (v.transpose() * &g);
        }
        p
    }

    /// h-orthogonal projection onto the horizontal space.
    pub fn horizontal_projector(&self) -> DMatrix<T> {
        self.projector(&self.horizontal)
    }

    pub fn vertical_projector(&self) -> DMatrix<T> {
        self.projector(&self.vertical)
    }

    /// h^{(0,2)} = h(π_H ·, π_H ·).
    pub fn h02(&self) -> DMatrix<T> {
        let p = self.horizontal_projector();
        linalg::sym(&(p.transpose() * self.space.metric() * p))
    }

    /// h^{(2,0)} = h(π_V ·, π_V ·).
    pub fn h20(&self) -> DMatrix<T> {
        let p = self.vertical_projector();
        linalg::sym(&(p.transpose() * self.space.metric() * p))
    }

    /// Unit horizontal k-vector e_{H₁} ∧ ⋯ ∧ e_{H_r}.
    pub fn horizontal_unit(&self) -> KVector<T> {
        KVector::decomposable(&self.space, &self.horizontal).expect("frame fits")
    }

    /// Unit vertical (n−r)-vector.
    pub fn vertical_unit(&self) -> KVector<T> {
        KVector::decomposable(&self.space, &self.vertical).expect("frame fits")
    }

    /// Components a^{(p,q)}, p vertical and q horizontal slots; they sum to `a`.
    pub fn type_decompose(&self, a: &KForm<T>) -> Result<BTreeMap<(usize, usize), KForm<T>>> {
        if a.dim() != self.dim() {
            return Err(Error::Dimension("form and split live in different dimensions".into()));
        }
        let n = self.dim();
        let m = a.degree();
        let nv = self.vertical.len();
        let e = self.frame_matrix();
        let einv = e.clone().try_inverse().ok_or_else(|| Error::NotPositiveDefinite("singular split frame".into()))?;
        let adapted = a.pullback_matrix(&e, a.space())?;
        let subs = subsets(n, m);
        let mut out = BTreeMap::new();
        for p in 0..=m.min(nv) {
            let q = m - p;
            if q > self.horizontal.len() {
                continue;
            }
            let mut c = adapted.clone();
            for (idx, coef) in subs.iter().zip(c.coeffs_mut()) {
                if idx.iter().filter(|&&i| i < nv).count() != p {
                    *coef = T::zero();
                }
            }
            out.insert((p, q), c.pullback_matrix(&einv, a.space())?);
        }
        Ok(out)
    }

    /// Pure type of `a` if every other component has norm ≤ tol·max(1, |a|).
    pub fn pure_type(&self, a: &KForm<T>, tol: T) -> Result<Option<(usize, usize)>> {
        let parts = self.type_decompose(a)?;
        let scale = a.norm().max(T::one());
        let big: Vec<(usize, usize)> = parts.iter().filter(|(_, f)| f.norm() > tol * scale).map(|(t, _)| *t).collect();
        Ok(match big.len() {
            0 => parts.keys().next().copied(),
            1 => Some(big[0]),
            _ => None,
        })
    }

    /// Norm of the components of `a` other than `ty`.
    pub fn off_type_norm(&self, a: &KForm<T>, ty: Option<(usize, usize)>) -> Result<T> {
        let parts = self.type_decompose(a)?;
        Ok(parts
            .iter()
            .filter(|(t, _)| Some(**t) != ty)
            .fold(T::zero(), |s, (_, f)| s + f.norm_sq())
            .sqrt())
    }

    /// Contract a pure-type form with the vertical and horizontal parts of v and
    /// measure how far each result is from the expected type.
    pub fn interior_type_check(&self, v: &DVector<T>, a: &KForm<T>, tol: T) -> Result<InteriorTypeReport<T>> {
        let (p, q) = self
            .pure_type(a, tol)?
            .ok_or_else(|| Error::Precondition("form is not of pure type".into()))?;
        if a.degree() == 0 {
            return Err(Error::Degree("interior product of a 0-form".into()));
        }
        let vv = self.vertical_projector() * v;
        let vh = self.horizontal_projector() * v;
        let vt = if p > 0 { Some((p - 1, q)) } else { None };
        let ht = if q > 0 { Some((p, q - 1)) } else { None };
        let bv = a.interior(&vv)?;
        let bh = a.interior(&vh)?;
        Ok(InteriorTypeReport {
            input_type: (p, q),
            vertical_type: vt,
            vertical_defect: self.off_type_norm(&bv, vt)?,
            horizontal_type: ht,
            horizontal_defect: self.off_type_norm(&bh, ht)?,
        })
    }
}
