use thiserror::Error;

/// Errors surfaced by the auction library.
#[derive(Debug, Error)]
pub enum AuctionError {
    /// A parameter or input violated a documented invariant.
    #[error("validation: {0}")]
    Validation(String),

    /// A data file could not be parsed; the line number is 1-based and
    /// counts the header row.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Every candidate mechanism violated the reservation constraint.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AuctionError>;

impl AuctionError {
    pub fn validation(msg: impl Into<String>) -> Self {
        AuctionError::Validation(msg.into())
    }
}
