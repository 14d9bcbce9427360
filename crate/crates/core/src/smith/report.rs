use serde::Serialize;

use super::residual::ResidualReport;

/// Aggregate over a set of point reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub points: usize,
    pub critical_points: usize,
    pub degenerate_points: usize,
    pub max_residual_form: f64,
    pub max_residual_conformal: f64,
    pub max_alt_residual: f64,
    pub min_slack: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// Maxima and minima over the reports; the verdict passes iff every point does.
pub fn summarize(reports: &[ResidualReport]) -> Summary {
    Summary {
        points: reports.len(),
        critical_points: reports.iter().filter(|r| r.critical).count(),
        degenerate_points: reports.iter().filter(|r| !r.critical && r.plane_value.is_none()).count(),
        max_residual_form: reports.iter().map(|r| r.residual_form).fold(0.0, f64::max),
        max_residual_conformal: reports.iter().map(|r| r.residual_conformal).fold(0.0, f64::max),
        max_alt_residual: reports.iter().map(|r| r.alt_residual).fold(0.0, f64::max),
        min_slack: reports.iter().map(|r| r.inequality_slack).reduce(f64::min).unwrap_or(0.0),
        verdict: Verdict::from_bool(reports.iter().all(ResidualReport::passes)),
    }
}
