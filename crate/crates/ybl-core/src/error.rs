use thiserror::Error;

/// Error type shared by all solver layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: out-of-range parameter, non-finite coordinate, bad grid.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to converge or lost accuracy.
    /// `last` carries the final two refinement values where applicable.
    #[error("numeric error in {what}: {details}")]
    Numeric {
        what: &'static str,
        details: String,
    },

    /// Evaluation exactly at a Green's-function pole.
    #[error("singular point: {0}")]
    Singular(String),

    /// Field sampled on a different grid than the operator expects.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Config-file or exponent-block validation failure, names the violated rule.
    #[error("config validation: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(what: &'static str, details: impl Into<String>) -> Self {
        Error::Numeric {
            what,
            details: details.into(),
        }
    }
}
