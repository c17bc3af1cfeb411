//! The diminishing segment process: `Ξ_0 = [-1, 1]` and
//! `Ξ_{n+1} = Ξ_n ∩ [a_{n+1} - 1, a_{n+1} + 1]` with `a_{n+1}` uniform on `Ξ_n`.
//!
//! * [`process`]: direct, thinned and stick-breaking samplers.
//! * [`density`]: exact coefficients of the shrinkage density and `E S_n`.
//! * [`stats`]: reference laws, KS distances and the verification suites.
//! * [`cli`]: the `segproc` command-line front end.

pub mod cli;
pub mod density;
pub mod process;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use num_rational::BigRational;

pub use crate::rng::{RngStream, Sign};
pub use crate::scalar::Real;

pub type Segment64 = process::Segment<f64>;
pub type ProcessState64 = process::ProcessState<f64>;
pub type ThinnedState64 = process::ThinnedState<f64>;
pub type GemVector64 = process::GemVector<f64>;

/// Exact coefficient table (`BigRational` rows).
pub type ExactTable = density::CoefficientTable<BigRational>;
pub type ExactExpectationRow = density::ExpectationRow<BigRational>;
