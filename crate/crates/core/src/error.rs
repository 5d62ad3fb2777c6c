use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("row {row}: label {value:?} is not 0 or 1")]
    NonBinaryLabel { row: usize, value: String },

    #[error("file contains no data rows")]
    EmptyFile,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("split leaves a partition empty (train {train}, val {val}, test {test})")]
    DegenerateSplit {
        train: usize,
        val: usize,
        test: usize,
    },

    #[error("time axis is empty")]
    EmptyTimeAxis,

    #[error("loss is not finite")]
    NonFiniteLoss,

    #[error("invalid model kind: {0}")]
    InvalidKind(String),

    #[error("sequence length {seq_len} is shorter than kernel {kernel}")]
    SequenceTooShort { seq_len: usize, kernel: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("batch is empty")]
    EmptyBatch,

    #[error("gradient contains non-finite values")]
    NonFiniteGradient,

    #[error("AUC undefined: targets contain a single class")]
    SingleClassBatch,

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    DivergedLoss { epoch: usize },

    #[error("bad magic bytes")]
    BadMagic,

    #[error("unsupported checkpoint version {0}")]
    VersionMismatch(u8),

    #[error("file is truncated")]
    TruncatedFile,

    #[error("expected {expected} values per frame, got {got}")]
    WrongDimension { expected: usize, got: usize },

    #[error("invalid scenario script: {0}")]
    InvalidScript(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
