use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{index::MAX_DIM, ExtSpace, KForm};
use crate::scalar::Scalar;

/// JSON document for a custom constant-coefficient form; indices are 1-based.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormDocument {
    pub dim: usize,
    pub degree: usize,
    pub terms: Vec<FormTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormTerm {
    pub indices: Vec<usize>,
    pub coeff: f64,
}

impl FormDocument {
    pub fn to_form<T: Scalar>(&self) -> Result<KForm<T>> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::InvalidInput(format!("dim {} outside 1..={MAX_DIM}", self.dim)));
        }
        if self.degree > self.dim {
            return Err(Error::InvalidInput(format!("degree {} exceeds dim {}", self.degree, self.dim)));
        }
        let space = ExtSpace::euclidean(self.dim);
        let mut form = KForm::zero(&space, self.degree);
        let mut seen = BTreeSet::new();
        for t in &self.terms {
            if t.indices.len() != self.degree {
                return Err(Error::InvalidInput(format!("term {:?} does not have degree {}", t.indices, self.degree)));
            }
            if t.indices.iter().any(|&i| i == 0 || i > self.dim) {
                return Err(Error::InvalidInput(format!("term {:?} has an index outside 1..={}", t.indices, self.dim)));
            }
            if t.indices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(format!("term {:?} is not strictly increasing", t.indices)));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidInput(format!("term {:?} has a non-finite coefficient", t.indices)));
            }
            if !seen.insert(t.indices.clone()) {
                return Err(Error::InvalidInput(format!("duplicate term {:?}", t.indices)));
            }
            let idx: Vec<usize> = t.indices.iter().map(|i| i - 1).collect();
            form.add_term(&idx, T::lit(t.coeff))?;
        }
        Ok(form)
    }

    pub fn from_form<T: Scalar>(form: &KForm<T>) -> Self {
        FormDocument {
            dim: form.dim(),
            degree: form.degree(),
            terms: form
                .terms()
                .into_iter()
                .map(|(idx, c)| FormTerm { indices: idx.iter().map(|i| i + 1).collect(), coeff: c.to_f64_lossy() })
                .collect(),
        }
    }
}

pub fn form_from_json<T: Scalar>(s: &str) -> Result<KForm<T>> {
    let doc: FormDocument = serde_json::from_str(s)?;
    doc.to_form()
}

pub fn load_form<T: Scalar>(path: &Path) -> Result<KForm<T>> {
    form_from_json(&std::fs::read_to_string(path)?)
}
