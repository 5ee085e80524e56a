//! Error type shared by every module of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid binary code: {0}")]
    InvalidCode(String),

    #[error("path is not a slope-coded class member for n = {n}: {detail}")]
    NotInClass { n: u64, detail: String },

    #[error("argument {value} outside the domain [0, 1]")]
    OutOfDomain { value: f64 },

    #[error("invalid basis index (j = {j}, n = {n})")]
    InvalidIndex { j: u32, n: u64 },

    #[error("incomplete dyadic sample grid: expected {expected} samples, got {got}")]
    IncompleteSamples { expected: usize, got: usize },

    #[error("incomplete coefficient level {level}: expected {expected} entries, got {got}")]
    IncompleteCoefficients { level: u32, expected: usize, got: usize },

    #[error("grid level {level} exceeds the cap {cap}")]
    LevelOverflow { level: u32, cap: u32 },

    #[error("code length {n} outside the supported range [1, 2^26]")]
    InvalidLength { n: u64 },

    #[error("input of length {len} is shorter than the minimum {min}")]
    TooShort { len: usize, min: usize },

    #[error("invalid level interval: a = {a} > b = {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("epsilon must be positive and finite, got {epsilon}")]
    InvalidEpsilon { epsilon: f64 },

    #[error("tolerance must be positive and finite, got {tol}")]
    InvalidTolerance { tol: f64 },

    #[error("{got} samples requested, need at least {min}")]
    TooFewSamples { got: u64, min: u64 },

    #[error("horizon index {ell} out of range (max {max})")]
    HorizonOutOfRange { ell: usize, max: usize },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("config field `{field}`: {message}")]
    Config { field: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for configuration errors (CLI exit code 2).
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
