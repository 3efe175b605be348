use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: expected {expected} nodes, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("solver failure: {message} (last residual {residual:.3e})")]
    SolverFailure { message: String, residual: f64 },

    #[error("normalization error: {0}")]
    Normalization(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("continuation aborted: {0}")]
    ContinuationAbort(String),

    #[error("continuation failed after {iterations} iterations (ball ratio {ball_ratio:.3e}): {message}")]
    ContinuationFailure {
        message: String,
        iterations: usize,
        ball_ratio: f64,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },

    #[error("checksum mismatch in {path}")]
    Checksum { path: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_user_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::GridMismatch { .. }
                | Error::Parse { .. }
                | Error::Checksum { .. }
                | Error::Io(_)
        )
    }
}
