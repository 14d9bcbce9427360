//! Exterior algebra over an oriented inner product space.

mod form;
mod hadamard;
pub mod index;
mod linear;
mod space;

pub use form::{KForm, KVector};
pub use hadamard::{hadamard_check, HadamardReport};
pub use linear::{minors_matrix, InducedMap, LinearMap};
pub use space::{ExtSpace, Orientation};
