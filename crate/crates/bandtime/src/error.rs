use thiserror::Error;

/// Errors split into the two classes the CLI maps onto exit codes:
/// validation of inputs/configuration vs. numerical failures at runtime.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("validation: {0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The adaptive eigenvalue range hit its cap before the requested
    /// probability mass was captured.
    #[error(
        "numerical failure: arrival-time tail not captured (mass {captured:.9} with |m| <= {m_reached}, cap {m_cap})"
    )]
    TailNotCaptured {
        captured: f64,
        m_reached: i64,
        m_cap: i64,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
