use thiserror::Error;

use crate::language::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid signature: {0}")]
    Signature(String),
    #[error("invalid algebra: {0}")]
    Algebra(String),
    #[error("invalid matrix: {0}")]
    Matrix(String),
    #[error("variable `{0}` has no assigned value")]
    UnboundVariable(String),
    #[error("unknown connective `{0}`")]
    UnknownConnective(String),
    #[error("connective `{symbol}` takes {expected} argument(s), found {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("{what}: needs {needed}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
    #[error("partition is not a congruence")]
    NotACongruence,
    #[error("connective `{0}` is not binary")]
    NotBinary(String),
    #[error("the filter is not a single class of the generated congruence")]
    NotAdmitted,
    #[error("no generators and no constants")]
    EmptyGenerators,
    #[error("{0}")]
    Invalid(String),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    pub(crate) fn cap(what: &'static str, needed: u128, cap: u128) -> Error {
        Error::CapExceeded { what, needed, cap }
    }
}
