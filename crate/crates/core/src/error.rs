use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("bad smoothing window: {0}")]
    BadWindow(String),
    #[error("transform length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("{levels} decomposition levels requested for a signal of length {len}")]
    TooManyLevels { levels: usize, len: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no scales supplied")]
    EmptyScales,
    #[error("input too small: {0}")]
    TooSmall(String),
    #[error("input too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("zero variance input")]
    ZeroVariance,
    #[error("zero energy input")]
    ZeroEnergy,
    #[error("training diverged at epoch {epoch}: loss is not finite")]
    DivergenceDetected { epoch: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("both classes must be present")]
    SingleClass,
    #[error("empty input")]
    EmptyInput,
    #[error("life of {count} snapshots is shorter than 2 x {k}")]
    LifeTooShort { count: usize, k: usize },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("failure time {t_f} precedes current time {t_c}")]
    NegativeRul { t_f: f64, t_c: f64 },
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("unit {0} has non-consecutive cycles")]
    NonConsecutiveCycles(u32),
    #[error("bad magic in {0}")]
    BadMagic(PathBuf),
    #[error("truncated file {0}")]
    TruncatedFile(PathBuf),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
