use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid-parameter: {0}")]
    InvalidParameter(String),
    #[error("no-character: {0}")]
    NoCharacter(String),
    #[error("invalid-bicharacter: {reason} (witness {witness:?})")]
    InvalidBicharacter { reason: String, witness: Vec<u32> },
    #[error("invalid-field: {0}")]
    InvalidField(String),
    #[error("internal-error: {0}")]
    Internal(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not-self-paired: {0}")]
    NotSelfPaired(String),
    #[error("splitting-violation: {0}")]
    SplittingViolation(String),
    #[error("no-form: {0}")]
    NoForm(String),
    #[error("no-involution: {0}")]
    NoInvolution(String),
    #[error("verification-failure: {0}")]
    VerificationFailure(String),
}

impl Error {
    /// Stable kebab-case name of the error kind.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::NoCharacter(_) => "no-character",
            Error::InvalidBicharacter { .. } => "invalid-bicharacter",
            Error::InvalidField(_) => "invalid-field",
            Error::Internal(_) => "internal-error",
            Error::Unsupported(_) => "unsupported",
            Error::NotSelfPaired(_) => "not-self-paired",
            Error::SplittingViolation(_) => "splitting-violation",
            Error::NoForm(_) => "no-form",
            Error::NoInvolution(_) => "no-involution",
            Error::VerificationFailure(_) => "verification-failure",
        }
    }
}
