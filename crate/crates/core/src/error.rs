use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An input failed a numerical validity check (Hermiticity, trace, positivity, completeness).
    #[error("validation failed: {0}")]
    Validation(String),

    /// The requested dimension exceeds a configured cap.
    #[error("dimension {requested} exceeds the limit of {limit}")]
    Size { requested: usize, limit: usize },

    /// The conditional state is not a two-qubit state, so no CHSH test applies.
    #[error("unsupported cut: {0}")]
    UnsupportedCut(String),
}

pub type Result<T> = std::result::Result<T, Error>;
