//! Pointwise construction and certification of the calibrating form `Θ(F)`
//! for graphs of maps `F: Ω ⊂ R^n → R^m`.

pub mod certify;
pub mod comass;
pub mod error;
pub mod exterior;
pub mod frames;
pub mod gallery;
pub(crate) mod linalg;
pub mod maps;
pub mod minimality;
pub mod suite;
pub mod theta;

pub use error::{Error, Result};
