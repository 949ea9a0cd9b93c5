use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Inconsistent or unsupported run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A truncated linear system could not be solved reliably.
    #[error("singular system (condition estimate {condition:.3e}): {hint}")]
    Singular { condition: f64, hint: String },

    /// Two evaluation routes that must agree did not. Signals a bug.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
