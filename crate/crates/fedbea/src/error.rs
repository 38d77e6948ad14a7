//! Crate-wide error type.

/// Errors raised by simulation, verification, and I/O paths.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration; the message lists every violation found.
    #[error("configuration error: {0}")]
    Config(String),

    /// Inputs have inconsistent dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request exceeds what this build supports (with a remediation hint).
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// A parameter became non-finite during optimization.
    #[error("numeric divergence: {0}")]
    Divergence(String),

    /// A text input failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
