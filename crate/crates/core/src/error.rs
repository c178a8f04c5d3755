use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "insufficient capacity: {shortfall:.3e} mass could not be placed{}",
        .required_extension.map(|e| format!("; extend the domain by at least {e:.6}")).unwrap_or_default()
    )]
    Capacity {
        shortfall: f64,
        required_extension: Option<f64>,
    },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("optimality certificate failed: {0}")]
    Solver(String),

    #[error("ray {index}: {source}")]
    Ray {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(domain(format!("transport exponent must be finite and > 1, got {p}")))
    }
}
