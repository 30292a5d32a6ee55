//! Numerical laboratory for von Mangoldt approximants and the objects that
//! surround them: Gowers uniformity norms, bilinear polynomial averaging
//! operators, variational norms, arithmetic and oscillatory symbols, and
//! finite-level p-adic averaging operators.
//!
//! Every module is a pure library; the `mlab` binary in this crate binds them
//! into reproducible experiments (see [`experiments`]).

pub mod approximants;
pub mod arith;
pub mod averaging;
pub mod error;
pub mod experiments;
pub mod gowers;
pub mod padic;
pub mod phase;
pub mod poly;
pub mod series;
pub mod symbols;
pub mod tolerances;

pub use error::{MlabError, Result};
pub use num_complex::Complex64;
