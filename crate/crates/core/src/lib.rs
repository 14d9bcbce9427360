//! Numerical calibrated geometry: exterior algebra, calibrations, chart-based
//! Riemannian machinery, and residual checks for Smith immersions and submersions.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod calibration;
pub mod error;
pub mod exterior;
pub mod geometry;
pub mod linalg;
pub mod models;
pub mod scalar;
pub mod smith;
pub mod suites;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ExtSpace64 = exterior::ExtSpace<f64>;
pub type KForm64 = exterior::KForm<f64>;
pub type KVector64 = exterior::KVector<f64>;
pub type LinearMap64 = exterior::LinearMap<f64>;
pub type ExtSpace32 = exterior::ExtSpace<f32>;
pub type KForm32 = exterior::KForm<f32>;
pub type KVector32 = exterior::KVector<f32>;
