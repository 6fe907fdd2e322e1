use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    CompositeModulus(u64),
    #[error("modulus {0} is below 3")]
    ModulusTooSmall(u64),
    #[error("requested {requested} elements from a field of size {field_size}")]
    SizeExceedsField { requested: u64, field_size: u64 },
    #[error("map expects {expected} variables, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("operands live in different fields (p = {left} and p = {right})")]
    FieldMismatch { left: u64, right: u64 },
    #[error("collision energy is zero")]
    ZeroEnergy,
    #[error("p = {p} is a bad prime: f is affinely dependent on x^{k} modulo p")]
    BadPrime { p: u64, k: u32 },
    #[error("degenerate map: {0}")]
    DegenerateMap(String),
    #[error("interval length {length} too long (limit {limit})")]
    IntervalTooLong { length: u64, limit: String },
    #[error("budget exceeded for {what}: cost {cost} over limit {limit} (pass the override flag to run anyway)")]
    BudgetExceeded { what: String, cost: u128, limit: u128 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hyperplane has a zero normal vector")]
    ZeroNormal,
    #[error("{lines} lines is not below p^beta = {limit:.3}")]
    BetaViolated { lines: usize, limit: f64 },
    #[error("g has degree {degree} modulo p; at least 2 is required")]
    DegenerateG { degree: i64 },
    #[error("f is constant modulo p")]
    DegenerateF,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid configuration: {}", .0.join("; "))]
    ConfigInvalid(Vec<String>),
    #[error("i/o failure: {0}")]
    IoFailure(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::IoFailure(e.to_string())
    }
}
