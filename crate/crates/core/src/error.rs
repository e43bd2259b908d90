use thiserror::Error;

/// Errors produced by the simulation engine.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the range an operation supports.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integrand or field sample came out non-finite.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// A normalization window captures too little of the beam profile.
    #[error("window error: {0}")]
    Window(String),

    /// Two values that must share a grid or provenance do not.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A configuration document failed validation.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    /// A mask or image file could not be parsed or written.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
