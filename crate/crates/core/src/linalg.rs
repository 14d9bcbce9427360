//! Dense helpers layered over nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Determinant of a small square matrix stored row-major in `buf` (destroyed).
pub fn det_in_place<T: Scalar>(buf: &mut [T], k: usize) -> T {
    match k {
        0 => return T::one(),
        1 => return buf[0],
        2 => return buf[0] * buf[3] - buf[1] * buf[2],
        3 => {
            return buf[0] * (buf[4] * buf[8] - buf[5] * buf[7])
                - buf[1] * (buf[3] * buf[8] - buf[5] * buf[6])
                + buf[2] * (buf[3] * buf[7] - buf[4] * buf[6])
        }
        _ => {}
    }
    let mut det = T::one();
    for c in 0..k {
        let mut piv = c;
        let mut best = buf[c * k + c].abs();
        for r in c + 1..k {
            let v = buf[r * k + c].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == T::zero() {
            return T::zero();
        }
        if piv != c {
            for j in 0..k {
                buf.swap(c * k + j, piv * k + j);
            }
            det = -det;
        }
        let p = buf[c * k + c];
        det *= p;
        for r in c + 1..k {
            let f = buf[r * k + c] / p;
            if f != T::zero() {
                for j in c + 1..k {
                    let v = buf[c * k + j];
                    buf[r * k + j] -= f * v;
                }
            }
        }
    }
    det
}

/// det of the submatrix `m[rows, cols]`.
pub fn minor<T: Scalar>(m: &DMatrix<T>, rows: &[usize], cols: &[usize], buf: &mut Vec<T>) -> T {
    let k = rows.len();
    debug_assert_eq!(k, cols.len());
    buf.clear();
    for &r in rows {
        for &c in cols {
            buf.push(m[(r, c)]);
        }
    }
    det_in_place(buf.as_mut_slice(), k)
}

/// Lower Cholesky factor, or a positive-definiteness error.
pub fn cholesky_lower<T: Scalar>(g: &DMatrix<T>) -> Result<DMatrix<T>> {
    g.clone()
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))
}

/// Largest absolute entry.
pub fn max_abs<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
}

/// Symmetric part (M + Mᵀ)/2.
pub fn sym<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

/// Validate symmetry (relative 1e−12 by default) and positive-definiteness.
pub fn check_spd<T: Scalar>(g: &DMatrix<T>, sym_tol: T) -> Result<DMatrix<T>> {
    if !g.is_square() {
        return Err(Error::Dimension(format!("metric is {}x{}", g.nrows(), g.ncols())));
    }
    let scale = max_abs(g).max(T::one());
    let asym = max_abs(&(g - g.transpose()));
    if asym > sym_tol * scale {
        return Err(Error::NotPositiveDefinite(format!(
            "asymmetry {:e}",
            asym.to_f64_lossy()
        )));
    }
    cholesky_lower(&sym(g))
}

/// Gram–Schmidt with a second orthogonalization pass in the inner product `g`.
/// Columns whose residual norm falls below `drop_tol` are discarded.
pub fn gram_schmidt<T: Scalar>(cols: &[DVector<T>], g: &DMatrix<T>, drop_tol: T) -> Vec<DVector<T>> {
    let mut out: Vec<DVector<T>> = Vec::with_capacity(cols.len());
    for c in cols {
        let mut v = c.clone();
        let n0 = inner(&v, &v, g).max(T::zero()).sqrt();
        for _ in 0..2 {
            for q in &out {
                let p = inner(q, &v, g);
                v -= q * p;
            }
        }
        let nv = inner(&v, &v, g).max(T::zero()).sqrt();
        if nv > drop_tol * n0.max(T::one()) {
            out.push(v / nv);
        }
    }
    out
}

/// uᵀ g v.
#[inline]
pub fn inner<T: Scalar>(u: &DVector<T>, v: &DVector<T>, g: &DMatrix<T>) -> T {
    let mut s = T::zero();
    for i in 0..u.len() {
        if u[i] == T::zero() {
            continue;
        }
        for j in 0..v.len() {
            s += u[i] * g[(i, j)] * v[j];
        }
    }
    s
}

/// Frobenius norm.
pub fn frob<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |a, &b| a + b * b).sqrt()
}

/// Express a symmetric bilinear form `b` in a frame orthonormal for `g = L Lᵀ`:
/// returns L⁻¹ b L⁻ᵀ.
pub fn in_orthonormal_frame<T: Scalar>(b: &DMatrix<T>, l: &DMatrix<T>) -> DMatrix<T> {
    let linv = l.clone().try_inverse().expect("Cholesky factor is invertible");
    &linv * b * linv.transpose()
}

/// Inverse of an SPD matrix via its Cholesky factor.
pub fn spd_inverse<T: Scalar>(g: &DMatrix<T>) -> Result<DMatrix<T>> {
    g.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorization failed".into()))
}
