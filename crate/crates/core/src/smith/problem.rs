use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{ExtSpace, KForm, Orientation};
use crate::geometry::{space_at, ChartDomain, FdConfig, FormField, MapField, MapJet, MetricField};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// u: (L^k, g) → (M^n, h), α a k-form on M.
    Immersion,
    /// u: (M^n, h) → (L^k, g), α an (n−k)-form on M.
    Submersion,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Immersion => "immersion",
            Direction::Submersion => "submersion",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "immersion" => Ok(Direction::Immersion),
            "submersion" => Ok(Direction::Submersion),
            other => Err(Error::InvalidInput(format!("unknown direction {other:?}"))),
        }
    }
}

/// Tolerances for pass/fail verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub form: f64,
    pub conformal: f64,
    pub slack: f64,
    pub alt: f64,
    /// Budget C in "form residual ≤ tol ⟹ conformal residual ≤ C·tol".
    pub coupling: f64,
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { form: 1e-10, conformal: 1e-8, slack: 1e-10, alt: 1e-8, coupling: 10.0, rank: 1e-8 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.form, self.conformal, self.slack, self.alt, self.coupling, self.rank];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidInput("tolerances must be finite and positive".into()));
        }
        Ok(())
    }
}

/// A map between charts together with the metrics, orientations and calibration
/// needed to test the Smith equations.
#[derive(Clone)]
pub struct SmithProblem<T: Scalar> {
    pub name: String,
    pub direction: Direction,
    pub map: Arc<dyn MapField<T>>,
    pub source_metric: Arc<dyn MetricField<T>>,
    pub target_metric: Arc<dyn MetricField<T>>,
    /// Lives on the target for immersions and on the source for submersions.
    pub calibration: Arc<dyn FormField<T>>,
    pub source_orientation: Orientation,
    pub target_orientation: Orientation,
    pub domain: ChartDomain,
    pub tolerances: Tolerances,
    pub fd: FdConfig<T>,
}

impl<T: Scalar> fmt::Debug for SmithProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmithProblem")
            .field("name", &self.name)
            .field("direction", &self.direction)
            .field("source_dim", &self.map.source_dim())
            .field("target_dim", &self.map.target_dim())
            .field("calibration_degree", &self.calibration.degree())
            .finish()
    }
}

impl<T: Scalar> SmithProblem<T> {
    /// Validates dimensions and the calibration degree; positive orientations,
    /// the whole chart as domain, default tolerances.
    pub fn new(
        direction: Direction,
        map: Arc<dyn MapField<T>>,
        source_metric: Arc<dyn MetricField<T>>,
        target_metric: Arc<dyn MetricField<T>>,
        calibration: Arc<dyn FormField<T>>,
    ) -> Result<Self> {
        let (n1, n2) = (map.source_dim(), map.target_dim());
        if source_metric.dim() != n1 || target_metric.dim() != n2 {
            return Err(Error::Dimension(format!(
                "metrics have dimensions {} and {}, map is {n1} → {n2}",
                source_metric.dim(),
                target_metric.dim()
            )));
        }
        let (k, n) = match direction {
            Direction::Immersion => (n1, n2),
            Direction::Submersion => (n2, n1),
        };
        if k > n || k == 0 {
            return Err(Error::Dimension(format!("{direction} needs 0 < k ≤ n, got k = {k}, n = {n}")));
        }
        let want = match direction {
            Direction::Immersion => k,
            Direction::Submersion => n - k,
        };
        if calibration.dim() != n || calibration.degree() != want {
            return Err(Error::Degree(format!(
                "{direction} into dimension {n} with k = {k} needs a {want}-form on ℝ^{n}, got a {}-form on ℝ^{}",
                calibration.degree(),
                calibration.dim()
            )));
        }
        Ok(SmithProblem {
            name: String::new(),
            direction,
            map,
            source_metric,
            target_metric,
            calibration,
            source_orientation: Orientation::Positive,
            target_orientation: Orientation::Positive,
            domain: ChartDomain::whole(n1),
            tolerances: Tolerances::default(),
            fd: FdConfig::default(),
        })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_domain(mut self, domain: ChartDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tolerances = tol;
        self
    }

    pub fn with_fd(mut self, fd: FdConfig<T>) -> Self {
        self.fd = fd;
        self
    }

    pub fn with_orientations(mut self, source: Orientation, target: Orientation) -> Self {
        self.source_orientation = source;
        self.target_orientation = target;
        self
    }

    /// k: dimension of L.
    pub fn k(&self) -> usize {
        self.map.source_dim().min(self.map.target_dim())
    }

    /// n: dimension of M.
    pub fn n(&self) -> usize {
        self.map.source_dim().max(self.map.target_dim())
    }

    /// Everything the pointwise checks need at x.
    pub fn point(&self, x: &[T]) -> Result<PointData<T>> {
        if x.len() != self.map.source_dim() {
            return Err(Error::Dimension(format!("point has {} coordinates, expected {}", x.len(), self.map.source_dim())));
        }
        let jet = self.map.jet(x);
        jet.validate()?;
        let source = space_at(self.source_metric.as_ref(), x, self.source_orientation)?;
        let target = space_at(self.target_metric.as_ref(), &jet.u, self.target_orientation)?;
        let at = match self.direction {
            Direction::Immersion => &jet.u,
            Direction::Submersion => &jet.x,
        };
        let alpha = self.calibration.eval(at);
        let alpha = match self.direction {
            Direction::Immersion => alpha.rebase(&target)?,
            Direction::Submersion => alpha.rebase(&source)?,
        };
        Ok(PointData { jet, source, target, alpha })
    }
}

/// Pointwise data of a problem: the jet, both tangent spaces, and α on M.
#[derive(Clone, Debug)]
pub struct PointData<T: Scalar> {
    pub jet: MapJet<T>,
    pub source: ExtSpace<T>,
    pub target: ExtSpace<T>,
    pub alpha: KForm<T>,
}
