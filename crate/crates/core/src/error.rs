use thiserror::Error;

/// Errors raised by model construction, estimation, and testing routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular design matrix (rank {rank} < {columns} columns)")]
    SingularDesign { rank: usize, columns: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no convergence after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        /// Coefficients of the last iterate, converted to `f64`.
        last_iterate: Vec<f64>,
    },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by caller-supplied data or configuration rather
    /// than by a numerical procedure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Domain(_)
                | Error::InsufficientData(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
