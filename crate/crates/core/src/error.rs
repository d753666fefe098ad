use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("no connected geometric graph with K={nodes}, radius={radius} after {retries} attempts")]
    GenerationFailed {
        nodes: usize,
        radius: f64,
        retries: usize,
    },

    #[error("edge list parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("node index {index} out of range for {nodes} nodes")]
    NodeIndex { index: usize, nodes: usize },

    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("degenerate run: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    #[error("insufficient calibration trials: need at least {needed}, got {got}")]
    InsufficientTrials { needed: usize, got: usize },

    #[error("message audit mismatch: {0}")]
    Audit(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
