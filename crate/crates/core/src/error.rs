use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index {index} out of range for trajectory with {len} transitions")]
    OutOfRange { index: usize, len: usize },

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid MRP: {0}")]
    InvalidMrp(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("reducible chain: {0}")]
    Reducible(String),

    #[error("no feasible two-bootstrap pair for target n = {0}")]
    NoFeasiblePair(f64),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects discount factors outside (0, 1].
pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("gamma", format!("{gamma} is not in (0, 1]")))
    }
}
