use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("group needs at least one cyclic factor")]
    EmptyGroup,
    #[error("cyclic factor exponents must be positive")]
    ZeroExponent,
    #[error("{what} of size {base}^{exp} exceeds the materialization cap")]
    OverCap {
        what: &'static str,
        base: u64,
        exp: u64,
    },
    #[error("characteristic exponent e must be at least 1")]
    ZeroCharacteristic,
    #[error("modulus {base}^{exp} exceeds 2^31")]
    ModulusTooLarge { base: u64, exp: u32 },
    #[error("residue type cannot hold values up to {0}")]
    ResidueTooNarrow(u64),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("operands live in different rings")]
    SpecMismatch,
    #[error("element is not a unit of p-power order")]
    NotAUnit,
    #[error("element is not a normalized unit")]
    NotNormalized,
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("enumeration of {base}^{exp} units exceeds the budget of {budget}")]
    BudgetExceeded { base: u64, exp: u64, budget: u64 },
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("check `{check}` does not apply: {reason}")]
    NotApplicable { check: &'static str, reason: String },
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
