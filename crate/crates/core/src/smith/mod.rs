//! Dilation, Smith residuals in both formulations, the pointwise inequalities,
//! k-energy with its topological bound, k-tension, and invariance checks.

mod checks;
mod energy;
mod problem;
mod report;
mod residual;
mod tension;

pub use checks::{
    conformal_invariance_check, kernel_calibration_conditions, pullback_nabla_check, rescaled_problem, ConformalCheck,
    KernelCalibration, NablaReport, ScaleField,
};
pub use energy::{k_energy, EnergyReport, QuadratureSpec, CLOSED_TOL};
pub use problem::{Direction, PointData, SmithProblem, Tolerances};
pub use report::{summarize, Summary, Verdict};
pub use residual::{
    alt_immersion_defect, alt_immersion_residual, alt_submersion_defect, alt_submersion_residual, dilation,
    immersion_report, immersion_residual, residual, submersion_report, submersion_residual, sweep, ResidualReport,
    Verdicts,
};
pub use tension::{k_tension, k_tension_analytic, tension_norm};
