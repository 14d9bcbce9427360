//! Concrete verification targets: flat-torus Smith maps, conformal
//! reparametrizations, and warped fibrations with blockwise calibrations.

mod conformal;
mod curved;
mod flat;
mod warped;

pub use conformal::{complex_square, conformal_diffeo_compose, scaling, CONFORMAL_TOL};
pub use curved::{curved_model, curved_names};
pub use flat::{flat_model, manifest, model_info, registry, FlatModel, ManifestEntry};
pub use warped::{
    bryant_salamon_asd, bryant_salamon_g2_s3, bryant_salamon_spin7, BlockComponent, Profile, Side, WarpedFibration,
    WarpedSample,
};
