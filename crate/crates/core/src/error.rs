use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An operation was invoked in the wrong state-machine state.
    #[error("state error: {0}")]
    State(String),
    /// A protocol block does not have the structure the receiver expects.
    #[error("malformed block: {0}")]
    MalformedBlock(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    /// A scenario configuration field is invalid.
    #[error("invalid config field `{field}`: {message}")]
    Config {
        field: &'static str,
        message: String,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn state(msg: impl Into<String>) -> Self {
        Error::State(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
