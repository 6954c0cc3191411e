use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver did not converge (info = {info}) for seed {seed}, replicate {replicate}")]
    Eigensolver { seed: u64, replicate: u64, info: i32 },

    #[error("quadrature missed tolerance {tolerance:e}: estimate {estimate}, error estimate {error:e}")]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("assignment solver needs equal-size uniform measures ({0}); use wasserstein_flow")]
    NeedsFlow(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("certificate rejected: {0}")]
    Certification(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
