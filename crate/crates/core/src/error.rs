use thiserror::Error;

/// Errors raised by the model, oracle, security backend and pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("subcarrier index {k} out of range 1..={n_total}")]
    IndexOutOfRange { k: usize, n_total: usize },

    #[error("unphysical covariance matrix: symplectic eigenvalue {0} < 1")]
    Unphysical(f64),

    #[error("no key-rate crossing in the excess-noise bracket [0, {0}]")]
    NoCrossing(f64),

    #[error("key rate is zero at every N on the grid: no optimum")]
    NoOptimum,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::InvalidParameter(_) | Error::IndexOutOfRange { .. } => 2,
            Error::Unphysical(_) | Error::NoCrossing(_) | Error::NoOptimum => 3,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
        }
    }
}
