use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("arity {0} out of range (supported: 1..=24)")]
    ArityOutOfRange(usize),

    #[error("predicate is constant zero")]
    ConstantZero,

    #[error("rho(f) is zero")]
    ZeroDensity,

    #[error("not a balanced LTF")]
    NotBalanced,

    #[error("k + j must be even with 1 <= j < k (got k = {k}, j = {j})")]
    ParityViolation { k: usize, j: usize },

    #[error("no monarchy witness exists for k = {0} (need k >= 5)")]
    NoWitness(usize),

    #[error("malformed LP: {0}")]
    MalformedLp(String),

    #[error("LP objective is unbounded")]
    Unbounded,

    #[error("total constraint weight is zero")]
    ZeroWeight,

    #[error("brute force supports n <= {max} variables (got {n})")]
    TooManyVariables { n: usize, max: usize },

    #[error("need n >= k (n = {n}, k = {k})")]
    TooFewVariables { n: usize, k: usize },

    #[error("invalid accuracy parameter {0}; must lie in (0, 1)")]
    InvalidEpsilon(String),

    #[error("sketch states are not mergeable: {0}")]
    IncompatibleSketch(&'static str),

    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
