use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("incompatible operands: {0}")]
    IncompatibleOperands(String),

    #[error("unsupported dimension m = {0} (need m >= 3)")]
    UnsupportedDimension(u32),

    #[error("numerical failure at eigenpair {index}: {detail}")]
    NumericalFailure { index: usize, detail: String },

    #[error("ill-posed request: {0}")]
    IllPosed(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
