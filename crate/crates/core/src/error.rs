use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate collision configuration: {0}")]
    DegenerateConfiguration(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported quadrature degree {degree}: {reason}")]
    UnsupportedDegree { degree: usize, reason: &'static str },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("blow-up detected at t = {time}: L^inf_w norm {norm} exceeds {limit}")]
    BlowUp { time: f64, norm: f64, limit: f64 },

    #[error("config error{}: {message}", location(*.line, .key.as_deref()))]
    Config {
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

fn location(line: Option<usize>, key: Option<&str>) -> String {
    match (line, key) {
        (Some(l), Some(k)) => format!(" at line {l} (key `{k}`)"),
        (Some(l), None) => format!(" at line {l}"),
        (None, Some(k)) => format!(" (key `{k}`)"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            key: Some(key.into()),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
