use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::calibration::{cayley, ConventionTable};
use crate::error::{Error, Result};
use crate::exterior::{index::subsets, ExtSpace, KForm, Orientation};
use crate::geometry::{horizontal_split, MapJet, Split};
use crate::linalg;
use crate::smith::{dilation, submersion_report, PointData, ResidualReport, Tolerances};

/// A radial profile r ↦ f(r).
pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which of α and ⋆α a declared component belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alpha,
    StarAlpha,
}

/// A declared (p,q)-component: coefficient(r) times the matching block of the
/// flat model form written in coordinates. p counts vertical slots.
#[derive(Clone)]
pub struct BlockComponent {
    pub side: Side,
    pub ptype: (usize, usize),
    pub label: &'static str,
    pub coefficient: Profile,
}

/// A warped product h = w(r)²·(base block) + v(r)²·(fibre block) in an adapted
/// coframe, with the calibration given blockwise.
///
/// The coframe is realized in coordinates by D = diag(w on horizontal axes,
/// v on vertical axes): h = D², α = D*α₀ for a flat model form α₀, and u is
/// the coordinate projection onto the horizontal axes with a flat base metric.
#[derive(Clone)]
pub struct WarpedFibration {
    pub name: &'static str,
    pub horizontal: Vec<usize>,
    pub vertical: Vec<usize>,
    pub w: Profile,
    pub v: Profile,
    /// The dilation as stated in closed form.
    pub lambda: Profile,
    flat_alpha: KForm<f64>,
    pub components: Vec<BlockComponent>,
}

/// Defects at one radius.
#[derive(Clone, Debug, Serialize)]
pub struct WarpedSample {
    pub r: f64,
    pub w: f64,
    pub v: f64,
    pub lambda_closed_form: f64,
    pub lambda_pipeline: f64,
    pub lambda_defect: f64,
    /// ‖u*g − λ²h^{(0,2)}‖ with the closed-form λ.
    pub conformal_defect: f64,
    /// |u*vol_L − λᵏ(⋆α)^{(0,k)}| in the metric of M, closed-form λ.
    pub volume_defect: f64,
    /// Metric norm of computed minus declared component, per declared block.
    pub component_defects: Vec<(String, f64)>,
    pub smith: ResidualReport,
}

impl WarpedSample {
    pub fn max_component_defect(&self) -> f64 {
        self.component_defects.iter().map(|c| c.1).fold(0.0, f64::max)
    }
}

impl WarpedFibration {
    pub fn base_dim(&self) -> usize {
        self.horizontal.len()
    }

    pub fn fibre_dim(&self) -> usize {
        self.vertical.len()
    }

    pub fn dim(&self) -> usize {
        self.base_dim() + self.fibre_dim()
    }

    fn block_part(&self, form: &KForm<f64>, p: usize) -> KForm<f64> {
        let mut out = form.clone();
        let subs = subsets(self.dim(), form.degree());
        for (idx, c) in subs.iter().zip(out.coeffs_mut()) {
            if idx.iter().filter(|i| self.vertical.contains(i)).count() != p {
                *c = 0.0;
            }
        }
        out
    }

    /// Every check at radius r.
    pub fn verify_at(&self, r: f64) -> Result<WarpedSample> {
        let (w, v) = ((self.w)(r), (self.v)(r));
        if !(w > 0.0 && v > 0.0 && w.is_finite() && v.is_finite()) {
            return Err(Error::Domain(format!("warping functions must be positive at r = {r} (w = {w}, v = {v})")));
        }
        let n = self.dim();
        let k = self.base_dim();
        let mut d = DMatrix::zeros(n, n);
        for &i in &self.horizontal {
            d[(i, i)] = w;
        }
        for &i in &self.vertical {
            d[(i, i)] = v;
        }
        let m = ExtSpace::with_metric(&d * &d, Orientation::Positive)?;
        let l = ExtSpace::euclidean(k);
        let alpha = self.flat_alpha.pullback_matrix(&d, &m)?;
        let star = alpha.hodge_star();
        let mut du = DMatrix::zeros(k, n);
        for (row, &col) in self.horizontal.iter().enumerate() {
            du[(row, col)] = 1.0;
        }
        let split = horizontal_split(&du, &m, &l, 1e-8)?;
        let Split::Regular(frame) = split else {
            return Err(Error::Precondition("projection lost rank".into()));
        };
        let lam_cf = (self.lambda)(r);
        let lam = dilation(&du, &m.metric(), &l.metric())?;
        let conf = du.transpose() * &du - frame.h02() * (lam_cf * lam_cf);
        let conformal_defect = linalg::frob(&linalg::in_orthonormal_frame(&conf, &m.cholesky()));

        let star_parts = frame.type_decompose(&star)?;
        let alpha_parts = frame.type_decompose(&alpha)?;
        let top = star_parts.get(&(0, k)).cloned().unwrap_or_else(|| KForm::zero(&m, k));
        let pulled_vol = KForm::volume(&l).pullback_matrix(&du, &m)?;
        let volume_defect = pulled_vol.checked_add(&top.scale(-lam_cf.powi(k as i32)))?.norm();

        let flat_star = self.flat_alpha.hodge_star();
        let mut component_defects = Vec::new();
        for c in &self.components {
            let (parts, flat) = match c.side {
                Side::Alpha => (&alpha_parts, &self.flat_alpha),
                Side::StarAlpha => (&star_parts, &flat_star),
            };
            let (p, q) = c.ptype;
            let deg = flat.degree();
            if p + q != deg {
                return Err(Error::InvalidInput(format!("component {} has type ({p},{q}) on a {deg}-form", c.label)));
            }
            let computed = parts.get(&(p, q)).cloned().unwrap_or_else(|| KForm::zero(&m, deg));
            let expected = self.block_part(flat, p).rebase(&m)?.scale((c.coefficient)(r));
            component_defects.push((c.label.to_string(), computed.checked_add(&expected.scale(-1.0))?.norm()));
        }

        let pd = PointData {
            jet: MapJet { x: vec![0.0; n], u: vec![0.0; k], jacobian: du, hessian: None },
            source: m.clone(),
            target: l,
            alpha,
        };
        let smith = submersion_report(&pd, &Tolerances::default())?;
        Ok(WarpedSample {
            r,
            w,
            v,
            lambda_closed_form: lam_cf,
            lambda_pipeline: lam,
            lambda_defect: (lam - lam_cf).abs(),
            conformal_defect,
            volume_defect,
            component_defects,
            smith,
        })
    }

    pub fn verify(&self, radii: &[f64]) -> Result<Vec<WarpedSample>> {
        radii.iter().map(|&r| self.verify_at(r)).collect()
    }
}

fn profile(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Profile {
    Arc::new(f)
}

/// G₂ metric on the spinor bundle of S³: fibres coassociative, α = ψ, k = 3.
pub fn bryant_salamon_g2_s3(kappa: f64, c0: f64, c1: f64) -> Result<WarpedFibration> {
    if !(kappa > 0.0 && c0 > 0.0 && c1 > 0.0) {
        return Err(Error::Domain(format!("parameters must be positive (κ = {kappa}, c₀ = {c0}, c₁ = {c1})")));
    }
    let t = ConventionTable::default();
    let s = move |r: f64| c0 + c1 * r * r;
    Ok(WarpedFibration {
        name: "bryant-salamon-g2-s3",
        horizontal: vec![0, 1, 2],
        vertical: vec![3, 4, 5, 6],
        w: profile(move |r| (3.0 * kappa * s(r)).cbrt()),
        v: profile(move |r| (4.0 * (c1.powi(3) / (3.0 * kappa)).cbrt() / s(r).cbrt()).sqrt()),
        lambda: profile(move |r| (3.0 * kappa).powf(-1.0 / 3.0) * s(r).powf(-1.0 / 3.0)),
        flat_alpha: t.phi::<f64>().hodge_star(),
        components: vec![
            BlockComponent {
                side: Side::StarAlpha,
                ptype: (0, 3),
                label: "φ^(0,3) = 3κ(c₀+c₁r²) u*vol",
                coefficient: profile(move |r| 3.0 * kappa * s(r)),
            },
            BlockComponent { side: Side::StarAlpha, ptype: (2, 1), label: "φ^(2,1) = 4c₁ Σ bᵢ∧Ωᵢ", coefficient: profile(move |_| 4.0 * c1) },
            BlockComponent { side: Side::StarAlpha, ptype: (1, 2), label: "φ^(1,2) = 0", coefficient: profile(|_| 0.0) },
        ],
    })
}

/// G₂ metric on Λ²₋ over a self-dual Einstein 4-manifold: fibres associative, α = φ, k = 4.
pub fn bryant_salamon_asd(w: Profile, v: Profile) -> WarpedFibration {
    let t = ConventionTable::default();
    let (w2, v2, w3, v3, w4) = (w.clone(), v.clone(), w.clone(), v.clone(), w.clone());
    let v5 = v.clone();
    let winv = w.clone();
    WarpedFibration {
        name: "bryant-salamon-asd",
        horizontal: vec![3, 4, 5, 6],
        vertical: vec![0, 1, 2],
        lambda: profile(move |r| 1.0 / winv(r)),
        w,
        v,
        flat_alpha: t.phi::<f64>(),
        components: vec![
            BlockComponent {
                side: Side::StarAlpha,
                ptype: (0, 4),
                label: "ψ^(0,4) = w⁴ u*vol",
                coefficient: profile(move |r| w4(r).powi(4)),
            },
            BlockComponent {
                side: Side::StarAlpha,
                ptype: (2, 2),
                label: "ψ^(2,2) = w²v² block",
                coefficient: profile(move |r| w2(r).powi(2) * v2(r).powi(2)),
            },
            BlockComponent {
                side: Side::Alpha,
                ptype: (3, 0),
                label: "φ^(3,0) = v³ vol_V",
                coefficient: profile(move |r| v3(r).powi(3)),
            },
            BlockComponent {
                side: Side::Alpha,
                ptype: (1, 2),
                label: "φ^(1,2) = w²v dθ block",
                coefficient: profile(move |r| w3(r).powi(2) * v5(r)),
            },
            BlockComponent { side: Side::Alpha, ptype: (2, 1), label: "φ^(2,1) = 0", coefficient: profile(|_| 0.0) },
            BlockComponent { side: Side::StarAlpha, ptype: (1, 3), label: "ψ^(1,3) = 0", coefficient: profile(|_| 0.0) },
        ],
    }
}

/// Spin(7) metric on the negative spinor bundle of S⁴: fibres Cayley, α = Φ, k = 4.
pub fn bryant_salamon_spin7(w: Profile, v: Profile) -> WarpedFibration {
    let t = ConventionTable::default();
    let (w2, v2, w4, v4) = (w.clone(), v.clone(), w.clone(), v.clone());
    let winv = w.clone();
    WarpedFibration {
        name: "bryant-salamon-spin7",
        horizontal: vec![0, 1, 2, 3],
        vertical: vec![4, 5, 6, 7],
        lambda: profile(move |r| 1.0 / winv(r)),
        w,
        v,
        flat_alpha: cayley::<f64>(&t),
        components: vec![
            BlockComponent {
                side: Side::Alpha,
                ptype: (0, 4),
                label: "Φ^(0,4) = w⁴ u*vol",
                coefficient: profile(move |r| w4(r).powi(4)),
            },
            BlockComponent {
                side: Side::Alpha,
                ptype: (2, 2),
                label: "Φ^(2,2) = w²v² β",
                coefficient: profile(move |r| w2(r).powi(2) * v2(r).powi(2)),
            },
            BlockComponent {
                side: Side::Alpha,
                ptype: (4, 0),
                label: "Φ^(4,0) = v⁴ vol_V",
                coefficient: profile(move |r| v4(r).powi(4)),
            },
            BlockComponent { side: Side::Alpha, ptype: (1, 3), label: "Φ^(1,3) = 0", coefficient: profile(|_| 0.0) },
            BlockComponent { side: Side::Alpha, ptype: (3, 1), label: "Φ^(3,1) = 0", coefficient: profile(|_| 0.0) },
        ],
    }
}
