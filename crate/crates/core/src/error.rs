use thiserror::Error;

/// Errors raised by the recovery pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kernel degree must be at least 1, got {0}")]
    InvalidDegree(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree mismatch: samples have n = {samples}, kernel weights have n = {weights}")]
    DegreeMismatch { samples: usize, weights: usize },

    #[error("grid size {grid} must be a power of two and at least {min}")]
    GridTooSmall { grid: usize, min: usize },

    #[error("cannot calibrate noise against an all-zero signal")]
    ZeroSignal,

    #[error("noise sigma must be finite and nonnegative, got {0}")]
    InvalidSigma(f64),

    #[error("invalid model: {0}")]
    InvalidModel(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("direction basis is numerically singular (relative smallest singular value {0:e})")]
    SingularBasis(f64),

    #[error("cannot pair an empty estimate")]
    EmptyEstimate,

    #[error(
        "source {source_index} projects to {value} along direction {direction}, outside (-pi, pi]"
    )]
    AliasedCoordinate {
        source_index: usize,
        direction: usize,
        value: f64,
    },

    #[error("Hankel matrix has numerical rank {rank}, below the model order {order}")]
    RankDeficient { rank: usize, order: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
