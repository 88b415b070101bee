use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("`{name}` = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("box has an empty or degenerate axis {axis}")]
    EmptyBox { axis: usize },

    #[error("total mass is zero")]
    ZeroMass,

    #[error("operation needs a grid-backed space")]
    NotGrid,

    #[error("restriction leaves no atoms")]
    EmptyRestriction,

    #[error("duplicate atom id {0}")]
    DuplicateId(u64),

    #[error("field has {got} values but the space has {expected} atoms")]
    FieldLength { expected: usize, got: usize },

    #[error("field value {value} at atom {id} is negative or not finite")]
    BadFieldValue { id: u64, value: f64 },

    #[error("parts overlap at atom {0}")]
    OverlappingParts(u64),

    #[error("{count} atoms exceeds the enumeration limit {limit}")]
    TooManyAtoms { count: usize, limit: usize },

    #[error("enumeration of {what} would exceed {limit}")]
    TooLarge { what: String, limit: u64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn out_of_range(name: &'static str, value: f64, range: impl Into<String>) -> Error {
    Error::OutOfRange {
        name,
        value,
        range: range.into(),
    }
}
