use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed program: {0}")]
    MalformedProgram(String),

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unbounded game: {0}")]
    Unbounded(String),

    #[error("lookup table build failed: {0}")]
    TableBuild(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::Syntax { line, message: message.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    /// Whether the error stems from bad input rather than a failure while
    /// running.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MalformedProgram(_)
                | Error::Syntax { .. }
                | Error::Parse(_)
                | Error::InvalidArgument(_)
                | Error::Config(_)
                | Error::Unbounded(_)
        )
    }
}
