use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),
    #[error("invalid frame length: {samples} samples for a segment of {segment_len}")]
    InvalidFrameLength { samples: usize, segment_len: usize },
    #[error("filterbank resolution: {bins} bins cannot hold {bands} triangular bands")]
    Resolution { bins: usize, bands: usize },
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("insufficient frames: statistics need at least 2, got {0}")]
    InsufficientFrames(usize),
    #[error("degenerate training set: {0}")]
    DegenerateTraining(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("empty evaluation: confusion matrix has no rows")]
    EmptyEvaluation,
    #[error("AUC undefined: labels contain a single class")]
    UndefinedAuc,
    #[error("grouping: {0}")]
    Grouping(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("inconsistent label for knee {0}")]
    InconsistentLabel(String),
    #[error("no candidate feature subsets")]
    NoSubsets,
}
