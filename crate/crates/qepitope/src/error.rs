//! Error types shared across the toolkit.

/// Errors produced by any layer of the toolkit, from gate wiring up to the CLI.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A size precondition was violated (qubit cap, empty dataset, ...).
    #[error("size error: {0}")]
    Size(String),

    /// Dimension mismatch between two objects that must agree.
    #[error("shape error: {0}")]
    Shape(String),

    /// Gate indices out of range or colliding.
    #[error("wiring error: {0}")]
    Wiring(String),

    /// Invalid configuration value.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input data, with the offending line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// An operation was called before required state was established.
    #[error("state error: {0}")]
    State(String),

    /// The problem instance is degenerate (single-class data, empty split, ...).
    #[error("degenerate problem: {0}")]
    Degenerate(String),

    /// A numerical routine failed to produce a usable result.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Inputs are individually well-formed but mutually inconsistent.
    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
