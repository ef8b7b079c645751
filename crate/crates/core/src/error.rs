use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// No sweep cell satisfied the working-point constraint. Carries the
    /// best unconstrained cell so callers can still report something useful.
    #[error("no cell satisfies the constraint: {reason}")]
    NotFound {
        reason: String,
        best: Box<crate::sweep::WorkingPoint>,
    },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        SimError::InvalidArgument(msg.into())
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
