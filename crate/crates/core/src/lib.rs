//! Riemann theta functions with characteristics on the Siegel upper
//! half-space, the theta-null stratification, Gauss-map ramification and
//! the Jacobians of the universal singularity scheme.

pub mod characteristics;
pub mod error;
pub mod gauss;
pub mod json;
pub mod linalg;
pub mod siegel;
pub mod sing_scheme;
pub mod strata;
pub mod theta;
pub mod verify;

pub use characteristics::{enumerate_all, enumerate_even, enumerate_odd, half_period, Characteristic, Parity};
pub use error::{Error, Result};
pub use siegel::{act, act_char, direct_sum, in_gamma, in_gamma_n_2n, validate_period, Direction, PeriodMatrix, SymplecticElement};
pub use theta::{eval_jet, EvalConfig, ThetaJet};
