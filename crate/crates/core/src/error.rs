use thiserror::Error;

/// Failures reported by the channel model, precoders and rate evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid array geometry: {0}")]
    InvalidGeometry(&'static str),

    #[error("lattice was built for a {lattice_x}x{lattice_y} aperture but the geometry spans {geometry_x}x{geometry_y}")]
    LatticeMismatch {
        lattice_x: f64,
        lattice_y: f64,
        geometry_x: f64,
        geometry_y: f64,
    },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{0} must be positive")]
    NonPositive(&'static str),

    #[error("channel matrix is identically zero")]
    ZeroChannel,

    #[error("Gram matrix is singular (condition number {condition:e})")]
    Singular { condition: f64 },

    #[error("{streams} streams exceed the {harmonics} transmit harmonics; zero forcing needs streams <= harmonics")]
    InfeasibleStreams { streams: usize, harmonics: usize },

    #[error("zero diagonal entry at index {0}")]
    ZeroDiagonal(usize),

    #[error("zero receive standard deviation at stream {0}")]
    ZeroSigma(usize),

    #[error("empty variance vector")]
    EmptySigma,

    #[error("adaptive quadrature did not reach {tolerance:e} (estimated error {estimate:e})")]
    IntegrationFailed { tolerance: f64, estimate: f64 },

    #[error("{0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
