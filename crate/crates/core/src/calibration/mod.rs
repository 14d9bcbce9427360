//! Standard calibrations, comass estimation, calibrated planes and the P_α operator.

mod comass;
mod io;
mod p_alpha;
mod planes;
mod standard;

pub use comass::{comass_estimate, ComassConfig, ComassEstimate};
pub use io::{form_from_json, load_form, FormDocument, FormTerm};
pub use p_alpha::{p_alpha, p_alpha_adjoint, pp_top_check};
pub use planes::{
    columns, first_cousin_check, gram_defect, is_calibrated_plane, orthogonal_complement, OrientedFrame, PlaneTest,
    FRAME_TOL,
};
pub use standard::{
    cayley, kaehler, kaehler_power, special_lagrangian, standard_form, standard_form_with, CalibrationForm,
    ComassCertificate, ConventionTable, PhiTerm, StandardCalibration,
};
