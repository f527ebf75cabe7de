use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spectral aliasing: {subcarriers} subcarriers cannot hold a span of {span} taps")]
    SpectralAliasing { span: usize, subcarriers: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e} exceeds {tolerance:e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("matrix is indefinite (pivot {pivot:e})")]
    Indefinite { pivot: f64 },

    #[error("singular channel")]
    SingularChannel,

    #[error("singular channel at subcarrier {index}")]
    SingularSubcarrier { index: usize },

    #[error("singular noise covariance at subcarrier {index}")]
    SingularNoise { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("all-zero input: {0}")]
    AllZero(&'static str),

    #[error("incompatible scenario: {0}")]
    Incompatible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
