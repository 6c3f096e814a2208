//! Summation-by-parts discretisations of variable-coefficient linear advection and
//! Burgers' equation, with the analysis tooling used to study their stability.

pub mod advection;
pub mod burgers;
pub mod error;
pub mod experiments;
pub mod flux;
pub mod grid;
pub mod linalg;
pub mod reference;
pub mod sbp;
pub mod spectrum;
pub mod ssprk;

pub use error::{Error, Result};
