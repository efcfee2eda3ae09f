//! Orthonormal polynomial bases for nonstandard weight functions, spectral
//! expansions with decay diagnostics, and cubature rules whose collocation
//! points minimize the absolute condition number of the integration formula.

pub mod cubature;
pub mod error;
pub mod experiments;
pub mod orthogonalization;
pub mod polycore;
pub mod projection;
pub mod refquad;
pub mod weights;

pub use error::{Error, Result};
