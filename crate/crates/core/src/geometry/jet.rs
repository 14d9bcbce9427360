use std::io::BufRead;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// A sampled 1-jet (and optional 2-jet) of a map between charts.
#[derive(Clone, Debug)]
pub struct MapJet<T: Scalar> {
    pub x: Vec<T>,
    pub u: Vec<T>,
    /// du, n₂ × n₁.
    pub jacobian: DMatrix<T>,
    /// `hessian[a]` is the n₁×n₁ matrix ∂²u^a/∂x_i∂x_j.
    pub hessian: Option<Vec<DMatrix<T>>>,
}

impl<T: Scalar> MapJet<T> {
    pub fn new(x: Vec<T>, u: Vec<T>, jacobian: DMatrix<T>, hessian: Option<Vec<DMatrix<T>>>) -> Result<Self> {
        let jet = MapJet { x, u, jacobian, hessian };
        jet.validate()?;
        Ok(jet)
    }

    pub fn source_dim(&self) -> usize {
        self.x.len()
    }

    pub fn target_dim(&self) -> usize {
        self.u.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n1, n2) = (self.x.len(), self.u.len());
        if self.jacobian.shape() != (n2, n1) {
            return Err(Error::Dimension(format!(
                "jacobian is {}x{}, expected {n2}x{n1}",
                self.jacobian.nrows(),
                self.jacobian.ncols()
            )));
        }
        if let Some(h) = &self.hessian {
            if h.len() != n2 || h.iter().any(|m| m.shape() != (n1, n1)) {
                return Err(Error::Dimension(format!("hessian must be {n2} matrices of size {n1}x{n1}")));
            }
            for m in h {
                let scale = linalg::max_abs(m).max(T::one());
                if linalg::max_abs(&(m - m.transpose())) > T::lit(1e-12) * scale {
                    return Err(Error::InvalidInput("hessian is not symmetric in its last two slots".into()));
                }
            }
        }
        Ok(())
    }
}

/// A smooth map between charts, evaluated as jets. Must be pure.
pub trait MapField<T: Scalar>: Send + Sync {
    fn source_dim(&self) -> usize;
    fn target_dim(&self) -> usize;
    /// Jet at x; the hessian may be omitted.
    fn jet(&self, x: &[T]) -> MapJet<T>;
}

/// A map given by a closure returning jets.
pub struct FnMap<T: Scalar> {
    n1: usize,
    n2: usize,
    f: Arc<dyn Fn(&[T]) -> MapJet<T> + Send + Sync>,
}

impl<T: Scalar> FnMap<T> {
    pub fn new(n1: usize, n2: usize, f: impl Fn(&[T]) -> MapJet<T> + Send + Sync + 'static) -> Self {
        FnMap { n1, n2, f: Arc::new(f) }
    }
}

impl<T: Scalar> MapField<T> for FnMap<T> {
    fn source_dim(&self) -> usize {
        self.n1
    }
    fn target_dim(&self) -> usize {
        self.n2
    }
    fn jet(&self, x: &[T]) -> MapJet<T> {
        (self.f)(x)
    }
}

/// u(x) = A x + b.
#[derive(Clone, Debug)]
pub struct AffineMap<T: Scalar> {
    pub a: DMatrix<T>,
    pub b: Vec<T>,
}

impl<T: Scalar> AffineMap<T> {
    pub fn linear(a: DMatrix<T>) -> Self {
        let b = vec![T::zero(); a.nrows()];
        AffineMap { a, b }
    }
}

impl<T: Scalar> MapField<T> for AffineMap<T> {
    fn source_dim(&self) -> usize {
        self.a.ncols()
    }
    fn target_dim(&self) -> usize {
        self.a.nrows()
    }
    fn jet(&self, x: &[T]) -> MapJet<T> {
        let n1 = self.a.ncols();
        let u = (0..self.a.nrows()).map(|r| (0..n1).fold(self.b[r], |s, c| s + self.a[(r, c)] * x[c])).collect();
        MapJet {
            x: x.to_vec(),
            u,
            jacobian: self.a.clone(),
            hessian: Some(vec![DMatrix::zeros(n1, n1); self.a.nrows()]),
        }
    }
}

/// outer ∘ inner, with hessians by the chain rule when both supply them.
pub struct Composed<T: Scalar> {
    pub outer: Arc<dyn MapField<T>>,
    pub inner: Arc<dyn MapField<T>>,
}

impl<T: Scalar> MapField<T> for Composed<T> {
    fn source_dim(&self) -> usize {
        self.inner.source_dim()
    }
    fn target_dim(&self) -> usize {
        self.outer.target_dim()
    }
    fn jet(&self, x: &[T]) -> MapJet<T> {
        let ji = self.inner.jet(x);
        let jo = self.outer.jet(&ji.u);
        let jac = &jo.jacobian * &ji.jacobian;
        let hessian = match (&jo.hessian, &ji.hessian) {
            (Some(ho), Some(hi)) => Some(
                (0..jo.u.len())
                    .map(|a| {
                        let mut m = ji.jacobian.transpose() * &ho[a] * &ji.jacobian;
                        for (b, hb) in hi.iter().enumerate() {
                            m += hb * jo.jacobian[(a, b)];
                        }
                        m
                    })
                    .collect(),
            ),
            _ => None,
        };
        MapJet { x: x.to_vec(), u: jo.u, jacobian: jac, hessian }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetHeader {
    n1: usize,
    n2: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetLine {
    x: Vec<f64>,
    u: Vec<f64>,
    #[serde(rename = "J")]
    j: Vec<Vec<f64>>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    h: Option<Vec<Vec<Vec<f64>>>>,
}

/// Jets read from a JSON-lines batch file.
#[derive(Clone, Debug)]
pub struct JetBatch<T: Scalar> {
    pub n1: usize,
    pub n2: usize,
    pub jets: Vec<MapJet<T>>,
}

fn matrix_from_rows<T: Scalar>(rows: &[Vec<f64>], nr: usize, nc: usize, what: &str) -> Result<DMatrix<T>> {
    if rows.len() != nr || rows.iter().any(|r| r.len() != nc) {
        return Err(Error::Dimension(format!("{what} must be {nr}x{nc}")));
    }
    Ok(DMatrix::from_fn(nr, nc, |i, j| T::lit(rows[i][j])))
}

impl<T: Scalar> JetBatch<T> {
    /// Header line `{n1, n2}` followed by one `{x, u, J, H?}` object per line.
    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (_, header) = lines.next().ok_or_else(|| Error::InvalidInput("empty jet batch".into()))?;
        let header: JetHeader = serde_json::from_str(&header?)
            .map_err(|e| Error::InvalidInput(format!("jet batch header: {e}")))?;
        let (n1, n2) = (header.n1, header.n2);
        let mut jets = Vec::new();
        for (lineno, line) in lines {
            let line: JetLine = serde_json::from_str(&line?)
                .map_err(|e| Error::InvalidInput(format!("jet batch line {}: {e}", lineno + 1)))?;
            let ctx = |e: Error| Error::Dimension(format!("jet batch line {}: {e}", lineno + 1));
            if line.x.len() != n1 || line.u.len() != n2 {
                return Err(ctx(Error::Dimension(format!("x must have {n1} and u {n2} entries"))));
            }
            let jac = matrix_from_rows(&line.j, n2, n1, "J").map_err(ctx)?;
            let hessian = match &line.h {
                None => None,
                Some(h) => {
                    if h.len() != n2 {
                        return Err(ctx(Error::Dimension(format!("H must have {n2} blocks"))));
                    }
                    Some(h.iter().map(|m| matrix_from_rows(m, n1, n1, "H block")).collect::<Result<Vec<_>>>().map_err(ctx)?)
                }
            };
            let jet = MapJet {
                x: line.x.iter().map(|&v| T::lit(v)).collect(),
                u: line.u.iter().map(|&v| T::lit(v)).collect(),
                jacobian: jac,
                hessian,
            };
            jet.validate().map_err(ctx)?;
            jets.push(jet);
        }
        Ok(JetBatch { n1, n2, jets })
    }

    /// Inverse of [`JetBatch::read`].
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&JetHeader { n1: self.n1, n2: self.n2 }).expect("serializable");
        out.push('\n');
        for j in &self.jets {
            let rows = |m: &DMatrix<T>| -> Vec<Vec<f64>> {
                (0..m.nrows()).map(|i| (0..m.ncols()).map(|c| m[(i, c)].to_f64_lossy()).collect()).collect()
            };
            let line = JetLine {
                x: j.x.iter().map(|v| v.to_f64_lossy()).collect(),
                u: j.u.iter().map(|v| v.to_f64_lossy()).collect(),
                j: rows(&j.jacobian),
                h: j.hessian.as_ref().map(|h| h.iter().map(rows).collect()),
            };
            out.push_str(&serde_json::to_string(&line).expect("serializable"));
            out.push('\n');
        }
        out
    }
}

/// (u*h)_{ij} = h_{ab} ∂_i u^a ∂_j u^b, given h at u(x).
pub fn pullback_metric<T: Scalar>(du: &DMatrix<T>, h_at_u: &DMatrix<T>) -> DMatrix<T> {
    linalg::sym(&(du.transpose() * h_at_u * du))
}

/// |du|² = tr(g⁻¹ u*h).
pub fn du_norm_sq<T: Scalar>(du: &DMatrix<T>, g_at_x: &DMatrix<T>, h_at_u: &DMatrix<T>) -> Result<T> {
    let ginv = linalg::spd_inverse(g_at_x)?;
    Ok((ginv * pullback_metric(du, h_at_u)).trace())
}

/// |du|² as Σ h(du eᵢ, du eᵢ) over a g-orthonormal frame eᵢ.
pub fn du_norm_sq_frame<T: Scalar>(du: &DMatrix<T>, g_at_x: &DMatrix<T>, h_at_u: &DMatrix<T>) -> Result<T> {
    let l = linalg::check_spd(g_at_x, T::lit(1e-12))?;
    let frame = l.transpose().try_inverse().expect("Cholesky factor is invertible");
    let img = du * frame;
    let mut s = T::zero();
    for j in 0..img.ncols() {
        let c = img.column(j).into_owned();
        s += linalg::inner(&c, &c, h_at_u);
    }
    Ok(s)
}
