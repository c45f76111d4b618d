use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown or invalid suite: {0}")]
    BadSuite(String),
    #[error("generator would emit {size} points, cap is {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("reports belong to different suites: {0} vs {1}")]
    Mismatch(String, String),
    #[error("bad argument: {0}")]
    Usage(String),
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] lipfree::Error),
}

impl CliError {
    /// Process exit status for this error: every error is a usage or input problem.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
