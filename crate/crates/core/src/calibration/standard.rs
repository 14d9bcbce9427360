use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{ExtSpace, KForm};
use crate::scalar::Scalar;

/// One signed term e^{ijk} of the associative 3-form (1-based indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiTerm {
    pub indices: [usize; 3],
    pub sign: i8,
}

/// Structure-constant table fixing the associative 3-form; all G2 and Spin(7)
/// forms are derived from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConventionTable {
    pub phi: Vec<PhiTerm>,
}

impl Default for ConventionTable {
    fn default() -> Self {
        let t = |i: usize, j: usize, k: usize, sign: i8| PhiTerm { indices: [i, j, k], sign };
        ConventionTable {
            phi: vec![t(1, 2, 3, 1), t(1, 4, 5, 1), t(1, 6, 7, 1), t(2, 4, 6, 1), t(2, 5, 7, -1), t(3, 4, 7, -1), t(3, 5, 6, -1)],
        }
    }
}

impl ConventionTable {
    pub fn from_json(s: &str) -> Result<Self> {
        let t: ConventionTable = serde_json::from_str(s)?;
        for term in &t.phi {
            let [i, j, k] = term.indices;
            if !(1 <= i && i < j && j < k && k <= 7) || term.sign.abs() != 1 {
                return Err(Error::InvalidInput(format!("bad convention term {term:?}")));
            }
        }
        Ok(t)
    }

    /// φ₀ on Euclidean ℝ⁷.
    pub fn phi<T: Scalar>(&self) -> KForm<T> {
        let s = ExtSpace::euclidean(7);
        let mut f = KForm::zero(&s, 3);
        for term in &self.phi {
            let idx: Vec<usize> = term.indices.iter().map(|i| i - 1).collect();
            f.add_term(&idx, T::lit(term.sign as f64)).expect("valid table");
        }
        f
    }
}

/// The standard calibrations on flat ℝⁿ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StandardCalibration {
    Kaehler,
    /// ω^p / p!.
    KaehlerPower(usize),
    SpecialLagrangian,
    Associative,
    Coassociative,
    Cayley,
}

impl StandardCalibration {
    pub const ALL_NAMES: [&'static str; 6] =
        ["kaehler", "kaehler-power", "special-lagrangian", "associative", "coassociative", "cayley"];

    /// Degree of the form on ℝⁿ.
    pub fn degree(self, n: usize) -> usize {
        match self {
            StandardCalibration::Kaehler => 2,
            StandardCalibration::KaehlerPower(p) => 2 * p,
            StandardCalibration::SpecialLagrangian => n / 2,
            StandardCalibration::Associative => 3,
            StandardCalibration::Coassociative => 4,
            StandardCalibration::Cayley => 4,
        }
    }

    /// The only admissible dimension, if fixed.
    pub fn fixed_dim(self) -> Option<usize> {
        match self {
            StandardCalibration::Associative | StandardCalibration::Coassociative => Some(7),
            StandardCalibration::Cayley => Some(8),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for StandardCalibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StandardCalibration::Kaehler => write!(f, "kaehler"),
            StandardCalibration::KaehlerPower(p) => write!(f, "kaehler-power:{p}"),
            StandardCalibration::SpecialLagrangian => write!(f, "special-lagrangian"),
            StandardCalibration::Associative => write!(f, "associative"),
            StandardCalibration::Coassociative => write!(f, "coassociative"),
            StandardCalibration::Cayley => write!(f, "cayley"),
        }
    }
}

impl FromStr for StandardCalibration {
    type Err = Error;

    /// Accepts the names in [`Self::ALL_NAMES`]; `kaehler-power:p` picks the power (default 2).
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownCalibration { name: s.to_string(), dim: 0 };
        Ok(match s {
            "kaehler" | "kahler" => StandardCalibration::Kaehler,
            "kaehler-power" => StandardCalibration::KaehlerPower(2),
            "special-lagrangian" | "slag" => StandardCalibration::SpecialLagrangian,
            "associative" => StandardCalibration::Associative,
            "coassociative" => StandardCalibration::Coassociative,
            "cayley" => StandardCalibration::Cayley,
            _ => match s.strip_prefix("kaehler-power:") {
                Some(p) => StandardCalibration::KaehlerPower(p.parse().map_err(|_| unknown())?),
                None => return Err(unknown()),
            },
        })
    }
}

/// Certificate attached after a comass run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComassCertificate {
    pub value: f64,
    pub tol: f64,
    pub restarts: usize,
}

/// A form intended as a calibration, with an optional comass certificate.
#[derive(Clone, Debug)]
pub struct CalibrationForm<T: Scalar> {
    pub form: KForm<T>,
    pub name: String,
    pub comass_certificate: Option<ComassCertificate>,
}

impl<T: Scalar> CalibrationForm<T> {
    pub fn custom(form: KForm<T>) -> Self {
        CalibrationForm { form, name: "custom".into(), comass_certificate: None }
    }

    /// `Some(true)` when certified with value ≤ 1 + tol.
    pub fn admitted(&self) -> Option<bool> {
        self.comass_certificate.as_ref().map(|c| c.value <= 1.0 + c.tol)
    }
}

/// Standard calibration under the default convention table.
pub fn standard_form<T: Scalar>(kind: StandardCalibration, n: usize) -> Result<CalibrationForm<T>> {
    standard_form_with(kind, n, &ConventionTable::default())
}

/// Standard calibration built from an explicit convention table.
pub fn standard_form_with<T: Scalar>(
    kind: StandardCalibration,
    n: usize,
    table: &ConventionTable,
) -> Result<CalibrationForm<T>> {
    let unknown = || Error::UnknownCalibration { name: kind.to_string(), dim: n };
    if let Some(d) = kind.fixed_dim() {
        if d != n {
            return Err(unknown());
        }
    } else if n == 0 || !n.is_multiple_of(2) || n > crate::exterior::index::MAX_DIM {
        return Err(unknown());
    }
    let form = match kind {
        StandardCalibration::Kaehler => kaehler(n),
        StandardCalibration::KaehlerPower(p) => {
            if p == 0 || 2 * p > n {
                return Err(unknown());
            }
            kaehler_power(n, p)
        }
        StandardCalibration::SpecialLagrangian => special_lagrangian(n),
        StandardCalibration::Associative => table.phi(),
        StandardCalibration::Coassociative => table.phi::<T>().hodge_star(),
        StandardCalibration::Cayley => cayley(table),
    };
    Ok(CalibrationForm { form, name: kind.to_string(), comass_certificate: None })
}

/// ω = Σ e^{2i−1, 2i}.
pub fn kaehler<T: Scalar>(n: usize) -> KForm<T> {
    let s = ExtSpace::euclidean(n);
    let mut w = KForm::zero(&s, 2);
    for i in 0..n / 2 {
        w.add_term(&[2 * i, 2 * i + 1], T::one()).expect("in range");
    }
    w
}

/// ω^p / p!.
pub fn kaehler_power<T: Scalar>(n: usize, p: usize) -> KForm<T> {
    let w = kaehler::<T>(n);
    let mut out = KForm::one(w.space());
    for j in 1..=p {
        out = out.wedge(&w).expect("degree fits").scale(T::one() / T::of_usize(j));
    }
    out
}

/// Re Υ for Υ = ∏ⱼ (e^{2j−1} + i e^{2j}).
pub fn special_lagrangian<T: Scalar>(n: usize) -> KForm<T> {
    let s = ExtSpace::euclidean(n);
    let mut re = KForm::one(&s);
    let mut im = KForm::zero(&s, 0);
    for j in 0..n / 2 {
        let x = KForm::basis(&s, &[2 * j]).expect("in range");
        let y = KForm::basis(&s, &[2 * j + 1]).expect("in range");
        let new_re = &re.wedge(&x).expect("fits") - &im.wedge(&y).expect("fits");
        let new_im = &re.wedge(&y).expect("fits") + &im.wedge(&x).expect("fits");
        re = new_re;
        im = new_im;
    }
    re
}

/// Φ₀ = e¹ ∧ φ₀ + ⋆φ₀ with φ₀ moved to coordinates 2..8.
pub fn cayley<T: Scalar>(table: &ConventionTable) -> KForm<T> {
    let phi = table.phi::<T>();
    let psi = phi.hodge_star();
    let s = ExtSpace::euclidean(8);
    let mut out = KForm::zero(&s, 4);
    for (idx, c) in phi.terms() {
        let mut shifted = vec![0];
        shifted.extend(idx.iter().map(|i| i + 1));
        out.add_term(&shifted, c).expect("in range");
    }
    for (idx, c) in psi.terms() {
        let shifted: Vec<usize> = idx.iter().map(|i| i + 1).collect();
        out.add_term(&shifted, c).expect("in range");
    }
    out
}
