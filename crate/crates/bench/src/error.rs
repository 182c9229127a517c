use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// `context` names the offending config line or flag.
    #[error("{context}: {msg}")]
    Parse { context: String, msg: String },
    #[error("invalid config: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
    #[error("nothing to plot")]
    EmptyTrace,
    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: rpbm::Error,
    },
}

impl BenchError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn run(context: impl Into<String>, source: rpbm::Error) -> Self {
        BenchError::Run {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
