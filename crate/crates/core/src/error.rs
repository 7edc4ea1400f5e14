use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate normalization: |(psi|H0|psi_tilde)| = {0:e} below floor")]
    DegenerateNormalization(f64),

    #[error("degenerate measurement: {0}")]
    DegenerateMeasurement(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("unresolved field tag {tag}: {reason}")]
    Unresolved { tag: String, reason: String },

    #[error("limit failure: {0}")]
    LimitFailure(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Unresolved { .. } => 1,
            Error::DegenerateNormalization(_)
            | Error::DegenerateMeasurement(_)
            | Error::NumericalFailure(_)
            | Error::LimitFailure(_) => 2,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
