use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at index {0}")]
    NonFiniteEntry(usize),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("invalid spectrum spec: {0}")]
    InvalidSpec(String),

    #[error("parse error at line {line}, column {column}")]
    Parse { line: usize, column: usize },

    #[error("ragged rows: line {line} has a different column count")]
    RaggedRows { line: usize },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("requested {requested} components in dimension {dim}")]
    TooManyComponents { requested: usize, dim: usize },

    #[error("vector {index} collapsed to zero")]
    ZeroVector { index: usize },

    #[error("non-finite update at step {step} (learning rate too large?)")]
    NonFiniteUpdate { step: usize },

    #[error("degenerate denominator for player {index}: v^T M v <= 1e-12")]
    DegenerateDenominator { index: usize },

    #[error("primed subspace collapsed: need {needed} directions, only {available} survive")]
    SubspaceCollapse { needed: usize, available: usize },

    #[error("projection of true component {index} onto the primed span is degenerate")]
    DegenerateProjection { index: usize },

    #[error("vector is not unit norm (norm = {norm})")]
    NotUnit { norm: f64 },

    #[error("invalid priming configuration: {0}")]
    InvalidConfig(String),

    #[error("operation requires the {expected} algorithm")]
    WrongAlgorithm { expected: &'static str },

    #[error("every sweep candidate diverged")]
    AllDiverged,

    #[error("missing run manifest in {0}")]
    MissingManifest(PathBuf),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("prop3 verification failed at step {step}: {detail}")]
    VerificationFailed { step: usize, detail: String },

    #[error("ground-truth cache {path} is corrupt: {reason}")]
    CorruptCache { path: PathBuf, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
