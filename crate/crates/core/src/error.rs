use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("exponent overflow at column {pos}")]
    ExponentOverflow { pos: usize },

    #[error("degree of the zero polynomial is undefined")]
    ZeroPolynomial,

    #[error("requested degree {requested} is below the total degree {actual}")]
    DegreeTooSmall { requested: u32, actual: u32 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("inverse check failed: {0}")]
    InverseMismatch(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("indeterminacy locus at infinity is empty; input is not an automorphism")]
    EmptyLocus,

    #[error("all coordinates are zero")]
    ZeroPoint,

    #[error("digit cap of {cap} digits exceeded at iterate {step}")]
    DigitCap { cap: u64, step: i64 },

    #[error("unsupported map: {0}")]
    Unsupported(String),

    #[error("periodicity undecided after {0} iterations")]
    Undecided(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("singular linear system")]
    Singular,

    #[error("interval precision exhausted at iterate {0}")]
    Precision(i64),

    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
