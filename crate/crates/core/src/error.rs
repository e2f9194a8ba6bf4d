use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum UrError {
    /// Shapes, dimensions, Hermiticity or normalization of user-supplied data.
    #[error("invalid input: {0}")]
    Input(String),

    /// A matrix handed to a lemma gap is not positive semidefinite.
    #[error("precondition violated for matrix #{index}: {reason}")]
    NotPsd { index: usize, reason: String },

    /// The construction only exists for pure states.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Fock-space truncation would drop more than the admissible weight.
    #[error("truncation: tail weight {tail:.3e} above level {level} exceeds {tolerance:.1e}; need dimension >= {required_dim}")]
    Truncation {
        tail: f64,
        level: usize,
        tolerance: f64,
        required_dim: usize,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, UrError>;

impl UrError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        UrError::Input(msg.into())
    }
}
