use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report. Validation never panics; it returns
/// one of these.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pool is empty")]
    EmptyPool,
    #[error("embedding dimensionality must be positive")]
    ZeroDimension,
    #[error("duplicate sequence id `{0}`")]
    DuplicateId(String),
    #[error("sequence `{0}` has no frames")]
    EmptySequence(String),
    #[error("sequence `{id}` frame {frame}: expected {expected} components, found {found}")]
    DimensionMismatch {
        id: String,
        frame: usize,
        expected: usize,
        found: usize,
    },
    #[error("sequence `{id}` frame {frame}: non-finite component at position {component}")]
    NonFiniteValue {
        id: String,
        frame: usize,
        component: usize,
    },
    #[error("vector {index} has (near-)zero norm")]
    ZeroNormVector { index: usize },
    #[error("vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
    #[error("pool of {n} samples is too small for nearest-neighbor statistics (need at least 2)")]
    PoolTooSmall { n: usize },
    #[error("budget {budget} exceeds pool size {n}")]
    BudgetExceedsPool { budget: usize, n: usize },
    #[error("start index {start} out of range for pool of {n}")]
    StartOutOfRange { start: usize, n: usize },
    #[error("no sample satisfies d_i <= ave_d; cannot seed the selection")]
    NoEligibleSeed,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "invalid box ({x1}, {y1}, {x2}, {y2}): corners must be finite with x2 >= x1 and y2 >= y1"
    )]
    InvalidBox { x1: f64, y1: f64, x2: f64, y2: f64 },
    #[error("invalid loss parameter {name} = {value}: must be finite and non-negative")]
    InvalidLossParam { name: &'static str, value: f64 },
    #[error("degenerate box pair: loss denominator is zero")]
    DegeneratePair,
    #[error("could not pack {clusters} cluster directions in {dim} dimensions after {attempts} attempts")]
    ClusterPackingFailed {
        clusters: usize,
        dim: usize,
        attempts: usize,
    },
    #[error("{path}: manifest parse error: {message}")]
    ManifestParse { path: PathBuf, message: String },
    #[error("{path}: blob is {actual} bytes, manifest expects {expected}")]
    BlobSizeMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
