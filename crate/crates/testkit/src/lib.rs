//! Independent oracles used by the test suites.
//!
//! [`box_sum`] evaluates theta series with arbitrary-precision arithmetic
//! over a fixed box of lattice points and shares no code with the library's
//! evaluation path. [`gauss`] detects Gauss-map ramification by finite
//! differences along the divisor, using only values and gradients.

pub mod box_sum;
pub mod gauss;

pub use box_sum::{BoxOracle, OracleValue};
pub use gauss::{gauss_oracle, GaussOracleReport};
