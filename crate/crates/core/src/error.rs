use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("genus mismatch: expected {expected}, got {got}")]
    GenusMismatch { expected: usize, got: usize },

    #[error("period matrix is not symmetric: asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("imaginary part is not positive definite: pivot {pivot:e} below floor {floor:e}")]
    ImagNotPositiveDefinite { pivot: f64, floor: f64 },

    #[error("matrix is not symplectic")]
    NotSymplectic,

    #[error("integer overflow in symplectic arithmetic")]
    IntegerOverflow,

    #[error("c*tau + d is numerically singular (condition number {condition:e})")]
    NumericallySingular { condition: f64 },

    #[error("invalid characteristic: {0}")]
    InvalidCharacteristic(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("required lattice radius {required} exceeds cap {cap}")]
    RadiusCapExceeded { required: f64, cap: f64 },

    #[error("lattice enumeration would exceed {cap} points")]
    PointCapExceeded { cap: usize },

    #[error("characteristic must be {expected}")]
    CharacteristicParity { expected: &'static str },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("iterate left the Siegel upper half-space")]
    LeftSiegelSpace,

    #[error("element is not in Gamma_g(4,8)")]
    NotInGamma48,

    #[error("point is not on the theta divisor: |theta| = {residual:e} > {tolerance:e}")]
    NotOnDivisor { residual: f64, tolerance: f64 },

    #[error("point is a singular point of the theta divisor: |grad theta| = {gradient:e} <= {tolerance:e}")]
    SingularPointOfTheta { gradient: f64, tolerance: f64 },

    #[error(
        "point is not on the singularity scheme: |theta| = {theta:e}, max |d theta/dz| = {gradient:e}, tolerance {tolerance:e}"
    )]
    NotOnSingularityScheme { theta: f64, gradient: f64, tolerance: f64 },

    #[error("bordered determinant identity violated: det B = {det_b}, -eta = {neg_eta}")]
    IdentityMismatch { det_b: String, neg_eta: String },

    #[error("direction matrix is not symmetric")]
    DirectionNotSymmetric,

    #[error("{0}")]
    Schema(String),
}

impl Error {
    /// Errors caused by malformed or out-of-contract input rather than by a
    /// numerical failure during evaluation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotSquare { .. }
                | Error::GenusMismatch { .. }
                | Error::NotSymmetric { .. }
                | Error::ImagNotPositiveDefinite { .. }
                | Error::NotSymplectic
                | Error::InvalidCharacteristic(_)
                | Error::InvalidConfig(_)
                | Error::CharacteristicParity { .. }
                | Error::NotInGamma48
                | Error::DirectionNotSymmetric
                | Error::Schema(_)
        )
    }

    /// Stable identifier used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::GenusMismatch { .. } => "GenusMismatch",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::ImagNotPositiveDefinite { .. } => "ImagNotPositiveDefinite",
            Error::NotSymplectic => "NotSymplectic",
            Error::IntegerOverflow => "IntegerOverflow",
            Error::NumericallySingular { .. } => "NumericallySingular",
            Error::InvalidCharacteristic(_) => "InvalidCharacteristic",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::RadiusCapExceeded { .. } => "RadiusCapExceeded",
            Error::PointCapExceeded { .. } => "PointCapExceeded",
            Error::CharacteristicParity { .. } => "CharacteristicParity",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::LeftSiegelSpace => "LeftSiegelSpace",
            Error::NotInGamma48 => "NotInGamma48",
            Error::NotOnDivisor { .. } => "NotOnDivisor",
            Error::SingularPointOfTheta { .. } => "SingularPointOfTheta",
            Error::NotOnSingularityScheme { .. } => "NotOnSingularityScheme",
            Error::IdentityMismatch { .. } => "IdentityMismatch",
            Error::DirectionNotSymmetric => "DirectionNotSymmetric",
            Error::Schema(_) => "Schema",
        }
    }
}
