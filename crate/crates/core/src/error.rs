use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("element is not a unit (valuation {ord})")]
    NonUnitInverse { ord: u32 },

    #[error("operands live in different rings: {left} vs {right}")]
    RingMismatch { left: String, right: String },

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("variable index {index} out of range for {nvars} variables")]
    VariableIndex { index: usize, nvars: usize },

    #[error("enumeration of {required} points exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("determinant of a {n}x{n} polynomial matrix exceeds the size guard {max}")]
    SizeGuardExceeded { n: usize, max: usize },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("theorem violation (implementation bug): {0}")]
    TheoremViolation(String),

    #[error("precision {have} too low, need at least {needed}")]
    PrecisionTooLow { needed: u32, have: u32 },

    #[error("map is not Keller")]
    NotKeller,

    #[error("prime {p} divides the discriminant {discriminant}")]
    BadPrime { p: u64, discriminant: BigInt },

    #[error("no residue root found in extensions of degree <= {max_degree}")]
    NoRootWithinBudget { max_degree: u32 },

    #[error("matrix is nonsingular (det = {det})")]
    NonSingular { det: BigInt },

    #[error("kernel vector has no unit coordinate")]
    DegenerateKernel,

    #[error("wrong characteristic: {0}")]
    WrongCharacteristic(String),

    #[error("wrong ring kind: {0}")]
    WrongRingKind(String),

    #[error("vector has no unit coordinate")]
    NotUnimodularVector,

    #[error("residue component {index} is the zero polynomial")]
    DegenerateComponent { index: usize },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
