use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the supported domain of an Orlicz function.
    #[error("{what}: argument {value} outside supported domain [0, {cap}]; construct the function with a larger domain cap")]
    Domain { what: String, value: f64, cap: f64 },

    /// Malformed or out-of-range user input.
    #[error("invalid input: {0}")]
    Input(String),

    /// Operand shapes do not agree (block dimensions, tuple lengths).
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A numerical kernel failed (eigensolver, non-finite values, bracketing).
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// A randomized sampler could not satisfy its constraint.
    #[error("sampling failure: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
