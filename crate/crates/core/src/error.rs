use thiserror::Error;

/// Every fallible operation in the crate reports one of these.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WimError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error(
        "integration did not reach tolerance: estimate {estimate}, error bound {error:e}, requested {requested:e}"
    )]
    Integration {
        estimate: f64,
        error: f64,
        requested: f64,
    },

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("improper posterior: {0}")]
    ImproperPosterior(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("transport problem has {cells} cost cells, above the cap of {cap}; use subsampled_wp")]
    Capacity { cells: usize, cap: usize },

    #[error("expectation diverges: {0}")]
    Divergence(String),

    #[error("density underflow: {0}")]
    Underflow(String),

    #[error("sampler failure: {0}")]
    SamplerFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("maximum likelihood estimate diverges: {0}")]
    MleDivergence(String),
}

pub type Result<T> = std::result::Result<T, WimError>;

pub(crate) fn invalid(msg: impl Into<String>) -> WimError {
    WimError::InvalidParameter(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> WimError {
    WimError::Domain(msg.into())
}
