use thiserror::Error;

/// Errors raised by the library layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("message must contain at least one bit")]
    EmptyMessage,
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("watermark index set must not be empty")]
    EmptyIndexSet,
    #[error("duplicate watermark index {0}")]
    DuplicateIndex(usize),
    #[error("mark basis {mark}° is not dissimilar from writing basis {writing}°")]
    BasisNotDissimilar { mark: f64, writing: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("observation basis mismatch: {left}° vs {right}°")]
    BasisMismatch { left: f64, right: f64 },
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("{name} must lie strictly inside (0, 1), got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("watermark too small: |I| = {have}, at least {need} required")]
    InsufficientMarks { have: usize, need: usize },
    #[error("secret key must be at least {min} bytes, got {got}")]
    KeyTooShort { got: usize, min: usize },
    #[error("need {need} eligible positions, only {have} available")]
    TooFewEligiblePositions { need: usize, have: usize },
    #[error("invalid derivation parameters: {0}")]
    InvalidDerivation(&'static str),
    #[error("error count {errors} exceeds total {total}")]
    CountExceedsTotal { errors: usize, total: usize },
    #[error("total must be positive")]
    ZeroTotal,
    #[error("flip rate and null rate are equal ({0})")]
    RatesEqual(f64),
    #[error("required sample size exceeds {limit}")]
    Unachievable { limit: usize },
    #[error("averaging needs at least two copies, got {0}")]
    TooFewCopies(usize),
    #[error("shift offset {offset} must satisfy 1 <= offset < {len}")]
    OffsetTooLarge { offset: usize, len: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("unsupported PGM maxval {0}, only 255 is supported")]
    UnsupportedMaxval(u32),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    TruncatedPixelData { expected: usize, found: usize },
    #[error("PGM payload cannot be emitted without image metadata")]
    MissingMeta,
    #[error("payload does not match image metadata: {0}")]
    MetaMismatch(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
