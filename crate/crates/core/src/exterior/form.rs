use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use super::index::{binomial, complement, rank, shuffle_sign, sort_sign, subsets};
use super::space::ExtSpace;
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Bitmask of a sorted index list.
#[inline]
fn mask(idx: &[usize]) -> u32 {
    idx.iter().fold(0u32, |m, &i| m | (1 << i))
}

#[inline]
fn rank_of_mask(mut m: u32) -> usize {
    let mut r = 0;
    let mut pos = 0;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        pos += 1;
        r += binomial(i, pos);
        m &= m - 1;
    }
    r
}

pub(crate) fn wedge_raw<T: Scalar>(n: usize, p: usize, a: &[T], q: usize, b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); binomial(n, p + q)];
    let sa = subsets(n, p);
    let sb = subsets(n, q);
    let mb: Vec<u32> = sb.iter().map(|j| mask(j)).collect();
    for (ia, i) in sa.iter().enumerate() {
        let ca = a[ia];
        if ca == T::zero() {
            continue;
        }
        let mi = mask(i);
        for (jb, &mj) in mb.iter().enumerate() {
            let cb = b[jb];
            if cb == T::zero() || mi & mj != 0 {
                continue;
            }
            // inversions: pairs (i in I, j in J) with j < i
            let inv: u32 = i.iter().map(|&x| (mj & ((1u32 << x) - 1)).count_ones()).sum();
            let v = ca * cb;
            let r = rank_of_mask(mi | mj);
            if inv.is_multiple_of(2) {
                out[r] += v;
            } else {
                out[r] -= v;
            }
        }
    }
    out
}

/// Contraction of the first slot: (v ⌟ a)(w…) = a(v, w…).
pub(crate) fn interior_raw<T: Scalar>(n: usize, k: usize, v: &[T], a: &[T]) -> Vec<T> {
    let subs = subsets(n, k - 1);
    let mut out = vec![T::zero(); subs.len()];
    for (r, j) in subs.iter().enumerate() {
        let mj = mask(j);
        let mut s = T::zero();
        for (i, &vi) in v.iter().enumerate() {
            if vi == T::zero() || mj & (1 << i) != 0 {
                continue;
            }
            let below = (mj & ((1u32 << i) - 1)).count_ones();
            let c = a[rank_of_mask(mj | (1 << i))];
            if below.is_multiple_of(2) {
                s += vi * c;
            } else {
                s -= vi * c;
            }
        }
        out[r] = s;
    }
    out
}

/// Derivation action of a matrix on tensors of covariant (`forms = true`) or contravariant type.
pub(crate) fn derivation_raw<T: Scalar>(n: usize, k: usize, a: &DMatrix<T>, c: &[T], forms: bool) -> Vec<T> {
    let subs = subsets(n, k);
    let mut out = vec![T::zero(); subs.len()];
    let mut tuple = vec![0usize; k];
    for (r, idx) in subs.iter().enumerate() {
        let mut s = T::zero();
        for m in 0..k {
            for l in 0..n {
                let coef = if forms { a[(l, idx[m])] } else { a[(idx[m], l)] };
                if coef == T::zero() {
                    continue;
                }
                tuple.copy_from_slice(idx);
                tuple[m] = l;
                if let Some((sorted, sign)) = sort_sign(&tuple) {
                    let v = c[rank(&sorted)];
                    s += if sign > 0 { coef * v } else { -(coef * v) };
                }
            }
        }
        out[r] = s;
    }
    out
}

fn gram_apply<T: Scalar>(gram: Option<DMatrix<T>>, c: &[T]) -> Vec<T> {
    match gram {
        None => c.to_vec(),
        Some(g) => (g * DVector::from_column_slice(c)).as_slice().to_vec(),
    }
}

fn basis_coeffs<T: Scalar>(n: usize, idx: &[usize]) -> Result<(usize, Vec<T>)> {
    if idx.iter().any(|&i| i >= n) {
        return Err(Error::Dimension(format!("index out of range for dimension {n}: {idx:?}")));
    }
    let k = idx.len();
    let mut c = vec![T::zero(); binomial(n, k)];
    if let Some((sorted, sign)) = sort_sign(idx) {
        c[rank(&sorted)] = if sign > 0 { T::one() } else { -T::one() };
    }
    Ok((k, c))
}

macro_rules! graded_common {
    ($ty:ident) => {
        impl<T: Scalar> $ty<T> {
            pub fn zero(space: &ExtSpace<T>, degree: usize) -> Self {
                assert!(degree <= space.dim(), "degree {} exceeds dimension {}", degree, space.dim());
                $ty { space: space.clone(), degree, coeffs: vec![T::zero(); binomial(space.dim(), degree)] }
            }

            /// Dense coefficients in colex order of the sorted multi-index.
            pub fn from_coeffs(space: &ExtSpace<T>, degree: usize, coeffs: Vec<T>) -> Result<Self> {
                if degree > space.dim() {
                    return Err(Error::Degree(format!("degree {} exceeds dimension {}", degree, space.dim())));
                }
                if coeffs.len() != binomial(space.dim(), degree) {
                    return Err(Error::Dimension(format!(
                        "expected {} coefficients, got {}",
                        binomial(space.dim(), degree),
                        coeffs.len()
                    )));
                }
                Ok($ty { space: space.clone(), degree, coeffs })
            }

            /// Basis element for a 0-based index list in any order; repeated indices give zero.
            pub fn basis(space: &ExtSpace<T>, idx: &[usize]) -> Result<Self> {
                let (degree, coeffs) = basis_coeffs(space.dim(), idx)?;
                Ok($ty { space: space.clone(), degree, coeffs })
            }

            /// Sum of `coeff · basis(indices)`.
            pub fn from_terms<'a, I>(space: &ExtSpace<T>, degree: usize, terms: I) -> Result<Self>
            where
                I: IntoIterator<Item = (&'a [usize], T)>,
            {
                let mut out = Self::zero(space, degree);
                for (idx, c) in terms {
                    if idx.len() != degree {
                        return Err(Error::Degree(format!("term {idx:?} has wrong degree")));
                    }
                    out.add_term(idx, c)?;
                }
                Ok(out)
            }

            pub fn space(&self) -> &ExtSpace<T> {
                &self.space
            }

            pub fn dim(&self) -> usize {
                self.space.dim()
            }

            pub fn degree(&self) -> usize {
                self.degree
            }

            pub fn coeffs(&self) -> &[T] {
                &self.coeffs
            }

            pub fn coeffs_mut(&mut self) -> &mut [T] {
                &mut self.coeffs
            }

            /// Coefficient on a 0-based index list in any order (alternating).
            pub fn coeff(&self, idx: &[usize]) -> T {
                if idx.len() != self.degree {
                    return T::zero();
                }
                match sort_sign(idx) {
                    Some((s, sign)) => {
                        let c = self.coeffs[rank(&s)];
                        if sign > 0 { c } else { -c }
                    }
                    None => T::zero(),
                }
            }

            pub fn add_term(&mut self, idx: &[usize], c: T) -> Result<()> {
                let (k, b) = basis_coeffs::<T>(self.dim(), idx)?;
                if k != self.degree {
                    return Err(Error::Degree(format!("term {idx:?} has wrong degree")));
                }
                for (x, y) in self.coeffs.iter_mut().zip(b) {
                    *x += y * c;
                }
                Ok(())
            }

            pub fn scale(&self, c: T) -> Self {
                $ty { space: self.space.clone(), degree: self.degree, coeffs: self.coeffs.iter().map(|&x| x * c).collect() }
            }

            pub fn checked_add(&self, other: &Self) -> Result<Self> {
                self.space.check_same(&other.space)?;
                if self.degree != other.degree {
                    return Err(Error::Degree(format!("cannot add degrees {} and {}", self.degree, other.degree)));
                }
                Ok($ty {
                    space: self.space.clone(),
                    degree: self.degree,
                    coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a + b).collect(),
                })
            }

            /// Largest absolute coefficient.
            pub fn max_abs(&self) -> T {
                self.coeffs.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
            }

            /// Largest coefficientwise difference; infinite when shapes differ.
            pub fn max_abs_diff(&self, other: &Self) -> T {
                if self.degree != other.degree || self.dim() != other.dim() {
                    return T::max_value().unwrap_or(T::one() / T::zero());
                }
                self.coeffs.iter().zip(&other.coeffs).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()))
            }

            /// Same coefficients on another space of equal dimension.
            pub fn rebase(&self, space: &ExtSpace<T>) -> Result<Self> {
                if space.dim() != self.dim() {
                    return Err(Error::Dimension(format!("cannot move dimension {} to {}", self.dim(), space.dim())));
                }
                Ok($ty { space: space.clone(), degree: self.degree, coeffs: self.coeffs.clone() })
            }

            /// Exterior product; errors on space mismatch or degree overflow.
            pub fn wedge(&self, other: &Self) -> Result<Self> {
                self.space.check_same(&other.space)?;
                let n = self.dim();
                if self.degree + other.degree > n {
                    return Err(Error::DegreeOverflow { p: self.degree, q: other.degree, n });
                }
                Ok($ty {
                    space: self.space.clone(),
                    degree: self.degree + other.degree,
                    coeffs: wedge_raw(n, self.degree, &self.coeffs, other.degree, &other.coeffs),
                })
            }

            /// Euclidean coefficient norm (ignores the metric).
            pub fn coeff_norm(&self) -> T {
                self.coeffs.iter().fold(T::zero(), |a, &b| a + b * b).sqrt()
            }

            /// Nonzero terms as (0-based index list, coefficient).
            pub fn terms(&self) -> Vec<(Vec<usize>, T)> {
                subsets(self.dim(), self.degree)
                    .iter()
                    .zip(&self.coeffs)
                    .filter(|(_, c)| **c != T::zero())
                    .map(|(i, c)| (i.clone(), *c))
                    .collect()
            }
        }

        impl<T: Scalar> Add for &$ty<T> {
            type Output = $ty<T>;
            /// Panics on mismatched spaces or degrees; use `checked_add` otherwise.
            fn add(self, rhs: Self) -> $ty<T> {
                self.checked_add(rhs).expect("operands must share space and degree")
            }
        }

        impl<T: Scalar> Add for $ty<T> {
            type Output = $ty<T>;
            fn add(self, rhs: Self) -> $ty<T> {
                &self + &rhs
            }
        }

        impl<T: Scalar> Sub for &$ty<T> {
            type Output = $ty<T>;
            fn sub(self, rhs: Self) -> $ty<T> {
                self.checked_add(&rhs.scale(-T::one())).expect("operands must share space and degree")
            }
        }

        impl<T: Scalar> Sub for $ty<T> {
            type Output = $ty<T>;
            fn sub(self, rhs: Self) -> $ty<T> {
                &self - &rhs
            }
        }

        impl<T: Scalar> Neg for &$ty<T> {
            type Output = $ty<T>;
            fn neg(self) -> $ty<T> {
                self.scale(-T::one())
            }
        }

        impl<T: Scalar> Neg for $ty<T> {
            type Output = $ty<T>;
            fn neg(self) -> $ty<T> {
                self.scale(-T::one())
            }
        }

        impl<T: Scalar> Mul<T> for &$ty<T> {
            type Output = $ty<T>;
            fn mul(self, c: T) -> $ty<T> {
                self.scale(c)
            }
        }

        impl<T: Scalar> Mul<T> for $ty<T> {
            type Output = $ty<T>;
            fn mul(self, c: T) -> $ty<T> {
                self.scale(c)
            }
        }

        impl<T: Scalar> PartialEq for $ty<T> {
            fn eq(&self, other: &Self) -> bool {
                self.degree == other.degree && self.space.compatible(&other.space) && self.coeffs == other.coeffs
            }
        }

        impl<T: Scalar> fmt::Display for $ty<T> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let terms = self.terms();
                if terms.is_empty() {
                    return write!(f, "0");
                }
                for (m, (idx, c)) in terms.iter().enumerate() {
                    if m > 0 {
                        write!(f, " + ")?;
                    }
                    let name: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
                    write!(f, "{}·{}{}", c, $ty::<T>::SYMBOL, name.join(","))?;
                }
                Ok(())
            }
        }
    };
}

/// Alternating k-form with dense coefficients over sorted multi-indices.
#[derive(Clone, Debug)]
pub struct KForm<T: Scalar> {
    space: ExtSpace<T>,
    degree: usize,
    coeffs: Vec<T>,
}

/// Element of Λᵏ(V), stored like [`KForm`].
#[derive(Clone, Debug)]
pub struct KVector<T: Scalar> {
    space: ExtSpace<T>,
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> KForm<T> {
    const SYMBOL: &'static str = "e^";
}

impl<T: Scalar> KVector<T> {
    const SYMBOL: &'static str = "e_";
}

graded_common!(KForm);
graded_common!(KVector);

impl<T: Scalar> KForm<T> {
    /// The constant 0-form 1.
    pub fn one(space: &ExtSpace<T>) -> Self {
        KForm { space: space.clone(), degree: 0, coeffs: vec![T::one()] }
    }

    /// vol = o·√det g · e^{1…n}.
    pub fn volume(space: &ExtSpace<T>) -> Self {
        let c = space.orientation().sign::<T>() * space.sqrt_det();
        KForm { space: space.clone(), degree: space.dim(), coeffs: vec![c] }
    }

    /// ⟨a, b⟩ with ⟨e^I, e^J⟩ = det(g⁻¹[I,J]).
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.space.check_same(&other.space)?;
        if self.degree != other.degree {
            return Err(Error::Degree(format!("inner product of degrees {} and {}", self.degree, other.degree)));
        }
        let gb = gram_apply(self.space.form_gram(self.degree), &other.coeffs);
        Ok(self.coeffs.iter().zip(&gb).fold(T::zero(), |a, (&x, &y)| a + x * y))
    }

    pub fn norm_sq(&self) -> T {
        self.inner(self).expect("same space")
    }

    pub fn norm(&self) -> T {
        self.norm_sq().max(T::zero()).sqrt()
    }

    /// Hodge star, characterized by a ∧ ⋆b = ⟨a,b⟩ vol.
    pub fn hodge_star(&self) -> Self {
        let n = self.dim();
        let k = self.degree;
        let scale = self.space.orientation().sign::<T>() * self.space.sqrt_det();
        let gb = gram_apply(self.space.form_gram(k), &self.coeffs);
        let mut out = vec![T::zero(); binomial(n, n - k)];
        for (r, idx) in subsets(n, k).iter().enumerate() {
            let comp = complement(idx, n);
            let s = shuffle_sign(idx, &comp);
            let v = gb[r] * scale;
            out[rank(&comp)] = if s > 0 { v } else { -v };
        }
        KForm { space: self.space.clone(), degree: n - k, coeffs: out }
    }

    /// Interior product v ⌟ a, contracting the first slot.
    pub fn interior(&self, v: &DVector<T>) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::Degree("interior product of a 0-form".into()));
        }
        if v.len() != self.dim() {
            return Err(Error::Dimension(format!("vector of length {} on dimension {}", v.len(), self.dim())));
        }
        Ok(KForm {
            space: self.space.clone(),
            degree: self.degree - 1,
            coeffs: interior_raw(self.dim(), self.degree, v.as_slice(), &self.coeffs),
        })
    }

    /// α(v₁,…,v_k).
    pub fn evaluate(&self, vectors: &[DVector<T>]) -> Result<T> {
        if vectors.len() != self.degree {
            return Err(Error::Degree(format!("{}-form evaluated on {} vectors", self.degree, vectors.len())));
        }
        let n = self.dim();
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::Dimension("vector length differs from dimension".into()));
        }
        if vectors.is_empty() {
            return Ok(self.coeffs[0]);
        }
        let m = DMatrix::from_columns(vectors);
        Ok(self.evaluate_columns(&m))
    }

    /// α evaluated on the columns of an n×k matrix.
    pub fn evaluate_columns(&self, m: &DMatrix<T>) -> T {
        let k = self.degree;
        let cols: Vec<usize> = (0..k).collect();
        let mut buf = Vec::with_capacity(k * k);
        let mut s = T::zero();
        for (idx, &c) in subsets(self.dim(), k).iter().zip(&self.coeffs) {
            if c != T::zero() {
                s += c * linalg::minor(m, idx, &cols, &mut buf);
            }
        }
        s
    }

    /// Natural pairing α(w) with a k-vector.
    pub fn pair(&self, w: &KVector<T>) -> Result<T> {
        if self.degree != w.degree() || self.dim() != w.dim() {
            return Err(Error::Degree("pairing requires equal degree and dimension".into()));
        }
        Ok(self.coeffs.iter().zip(w.coeffs()).fold(T::zero(), |a, (&x, &y)| a + x * y))
    }

    /// Metric dual k-vector.
    pub fn raise(&self) -> KVector<T> {
        let c = gram_apply(self.space.form_gram(self.degree), &self.coeffs);
        KVector::from_coeffs(&self.space, self.degree, c).expect("shape preserved")
    }

    /// Pullback by a matrix A: source → this space, landing on `source`.
    pub fn pullback_matrix(&self, a: &DMatrix<T>, source: &ExtSpace<T>) -> Result<Self> {
        if a.nrows() != self.dim() || a.ncols() != source.dim() {
            return Err(Error::Dimension(format!(
                "pullback by a {}x{} matrix from dimension {} to {}",
                a.nrows(),
                a.ncols(),
                source.dim(),
                self.dim()
            )));
        }
        let k = self.degree;
        if k > source.dim() {
            return Err(Error::Degree(format!("cannot pull a {k}-form back to dimension {}", source.dim())));
        }
        let rows = subsets(self.dim(), k);
        let cols = subsets(source.dim(), k);
        let mut buf = Vec::new();
        let mut out = vec![T::zero(); cols.len()];
        for (j, jdx) in rows.iter().enumerate() {
            let b = self.coeffs[j];
            if b == T::zero() {
                continue;
            }
            for (i, idx) in cols.iter().enumerate() {
                out[i] += b * linalg::minor(a, jdx, idx, &mut buf);
            }
        }
        Ok(KForm { space: source.clone(), degree: k, coeffs: out })
    }

    /// Derivation action (D_A α) = d/dt (I + tA)*α at t = 0.
    pub fn derivation(&self, a: &DMatrix<T>) -> Self {
        KForm {
            space: self.space.clone(),
            degree: self.degree,
            coeffs: derivation_raw(self.dim(), self.degree, a, &self.coeffs, true),
        }
    }
}

impl<T: Scalar> KVector<T> {
    /// v₁ ∧ ⋯ ∧ v_k.
    pub fn decomposable(space: &ExtSpace<T>, vectors: &[DVector<T>]) -> Result<Self> {
        let n = space.dim();
        let k = vectors.len();
        if k > n || vectors.iter().any(|v| v.len() != n) {
            return Err(Error::Dimension("vectors do not fit the space".into()));
        }
        if k == 0 {
            return Ok(KVector { space: space.clone(), degree: 0, coeffs: vec![T::one()] });
        }
        let m = DMatrix::from_columns(vectors);
        Ok(Self::from_columns(space, &m))
    }

    /// Wedge of the columns of an n×k matrix.
    pub fn from_columns(space: &ExtSpace<T>, m: &DMatrix<T>) -> Self {
        let k = m.ncols();
        let cols: Vec<usize> = (0..k).collect();
        let mut buf = Vec::new();
        let coeffs = subsets(space.dim(), k).iter().map(|idx| linalg::minor(m, idx, &cols, &mut buf)).collect();
        KVector { space: space.clone(), degree: k, coeffs }
    }

    pub fn from_vector(space: &ExtSpace<T>, v: &DVector<T>) -> Result<Self> {
        Self::from_coeffs(space, 1, v.as_slice().to_vec())
    }

    /// Metric dual form.
    pub fn lower(&self) -> KForm<T> {
        let c = gram_apply(self.space.vector_gram(self.degree), &self.coeffs);
        KForm::from_coeffs(&self.space, self.degree, c).expect("shape preserved")
    }

    /// ⟨e_I, e_J⟩ = det(g[I,J]).
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.space.check_same(&other.space)?;
        if self.degree != other.degree {
            return Err(Error::Degree("inner product of different degrees".into()));
        }
        let lb = other.lower();
        Ok(self.coeffs.iter().zip(lb.coeffs()).fold(T::zero(), |a, (&x, &y)| a + x * y))
    }

    pub fn norm(&self) -> T {
        self.inner(self).expect("same space").max(T::zero()).sqrt()
    }

    /// Hodge star transported through the metric: raise ∘ ⋆ ∘ lower.
    pub fn hodge_star(&self) -> Self {
        self.lower().hodge_star().raise()
    }

    /// Derivation action d/dt Λᵏ(I + tB) w at t = 0.
    pub fn derivation(&self, b: &DMatrix<T>) -> Self {
        KVector {
            space: self.space.clone(),
            degree: self.degree,
            coeffs: derivation_raw(self.dim(), self.degree, b, &self.coeffs, false),
        }
    }

    /// Vector in ℝⁿ for degree 1.
    pub fn to_vector(&self) -> Result<DVector<T>> {
        if self.degree != 1 {
            return Err(Error::Degree("not a 1-vector".into()));
        }
        Ok(DVector::from_column_slice(&self.coeffs))
    }
}
