use thiserror::Error;

pub type Result<T> = std::result::Result<T, MlabError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    /// A scale guard refused the request. `param` names the offending knob.
    #[error("unsupported scale for `{param}`: {detail}")]
    UnsupportedScale { param: String, detail: String },
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl MlabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        MlabError::InvalidArgument(msg.into())
    }

    pub(crate) fn scale(param: impl Into<String>, detail: impl Into<String>) -> Self {
        MlabError::UnsupportedScale {
            param: param.into(),
            detail: detail.into(),
        }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            MlabError::UnsupportedScale { .. } => 3,
            MlabError::NumericFailure(_) => 4,
            MlabError::Io(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for MlabError {
    fn from(e: std::io::Error) -> Self {
        MlabError::Io(e.to_string())
    }
}
