use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("zero element not allowed here")]
    ZeroElement,
    #[error("not integral at place {0}")]
    NotIntegral(String),
    #[error("element and place belong to different field families")]
    FieldMismatch,
    #[error("duplicate place {0} in approximation targets")]
    DuplicatePlace(String),
    #[error("no classical form in characteristic 2")]
    NoClassicalForm,
    #[error("invalid quaternion descriptor: {0}")]
    InvalidQuaternion(String),
    #[error("requires nonreal algebras")]
    RequiresNonreal,
    #[error("{0}")]
    Precondition(String),
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("formula error: {0}")]
    Formula(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
