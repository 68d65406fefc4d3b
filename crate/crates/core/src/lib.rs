//! Symbolic and numeric verification engine for the Hochschild 3-cycle
//! `c_V` of a self-dual comodule over a Hopf algebra, its cap product with
//! cups of derivations, and the Casimir argument for `HH_3 ≠ 0`.

pub mod cli;
pub mod coeff;
mod error;
pub mod expr;
pub mod form_lie;
pub mod hochschild;
pub mod matrix;
pub mod numeric;
pub mod report;
pub mod sample;

pub use coeff::Coeff;
pub use error::Error;
pub use matrix::QMatrix;
pub use report::{Status, VerificationReport};
