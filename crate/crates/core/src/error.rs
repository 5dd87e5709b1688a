use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Non-finite weights or inverse-correlation entries after an update.
    #[error("filter diverged at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("numerical error: {0}")]
    Numerical(String),

    /// The steady-state formula has a non-positive denominator.
    #[error("instability predicted: (1-lambda)*L*phi = {product} >= 2")]
    InstabilityPredicted { product: f64 },

    #[error("all {trials} trials diverged for algorithm {algorithm}")]
    DivergenceDominated { algorithm: String, trials: usize },

    #[error("{path}:{line}: {message}")]
    PlantParse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
