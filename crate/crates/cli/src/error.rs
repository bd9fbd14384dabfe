use thiserror::Error;

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] compound_returns::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Csv { line: u64, msg: String },
    #[error("cannot parse config: {0}")]
    ConfigSyntax(String),
    #[error("plot failed: {0}")]
    Plot(String),
}

impl ExperimentError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        ExperimentError::Config(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
