use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by ingestion, validation, and the numerical routines.
///
/// Variants fall into two classes, see [`Error::is_numeric`]: problems with the
/// input data itself, and failures of a numerical procedure on otherwise valid
/// data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}: empty body")]
    EmptyBody(String),
    #[error("{context}: ragged row {row}: expected {expected} cells, found {found}")]
    Ragged {
        context: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{context}: non-numeric cell {value:?} at row {row}, column {column:?}")]
    NonNumeric {
        context: String,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{context}: missing column {column:?}")]
    MissingColumn { context: String, column: String },
    #[error("bad magic: expected \"LDM1\", found {0:?}")]
    BadMagic(String),
    #[error("truncated: expected {expected} bytes of payload, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("matrix shape {rows}x{cols} has a zero dimension")]
    ZeroShape { rows: usize, cols: usize },
    #[error("row mismatch: representation has {repr} rows, factors have {factors}")]
    RowMismatch { repr: usize, factors: usize },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("unknown factor {0:?}")]
    UnknownFactor(String),
    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("missing cell (level_a={level_a}, level_b={level_b}) for seed {seed:?}")]
    MissingCell { seed: String, level_a: u8, level_b: u8 },
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("singular system: {0}")]
    Singular(String),
    #[error("zero variance: {0}")]
    ZeroVariance(String),
    #[error("non-finite training loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("zero-norm gradient at step {step}")]
    ZeroNorm { step: u64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    /// True for failures of a numerical procedure rather than malformed data.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Singular(_)
                | Error::ZeroVariance(_)
                | Error::NonFiniteLoss { .. }
                | Error::ZeroNorm { .. }
                | Error::Degenerate(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
