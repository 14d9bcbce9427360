//! Chart-based Riemannian machinery with finite-difference derivatives.

mod christoffel;
mod divergence;
mod fd;
mod forms;
mod jet;
mod metric;
mod split;

pub use christoffel::{christoffel, metric_derivatives, Christoffel};
pub use divergence::{
    div_lambda_commute_check, divergence_mixed, p_tension_from_jet, skew_defect, MixedField, SkewField,
};
pub use fd::{gradient, partial, FdConfig};
pub use forms::{closedness_defect, covariant_derivative_form, exterior_derivative, ConstantForm, FnForm, FormField};
pub use jet::{du_norm_sq, du_norm_sq_frame, pullback_metric, AffineMap, Composed, FnMap, JetBatch, MapField, MapJet};
pub use metric::{space_at, ChartDomain, ConformalMetric, ConstantMetric, Euclidean, FnMetric, MetricField};
pub use split::{horizontal_split, InteriorTypeReport, Split, SplitFrame, RANK_TOL};
