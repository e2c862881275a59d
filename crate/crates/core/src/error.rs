use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("segment [{start}, {end}) out of bounds for {frames} frames")]
    SegmentOutOfBounds {
        start: usize,
        end: usize,
        frames: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("sequence of {frames} frames is shorter than l_min = {l_min}")]
    SequenceTooShort { frames: usize, l_min: usize },

    #[error("no valid parse of {frames} frames with l_min = {l_min}, l_max = {l_max}")]
    NoValidParse {
        frames: usize,
        l_min: usize,
        l_max: usize,
    },

    #[error("invalid candidate (u = {u}, l = {l})")]
    InvalidCandidate { u: usize, l: usize },

    #[error("brute-force guard exceeded: {frames} frames > limit {limit}")]
    BruteForceGuard { frames: usize, limit: usize },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("class {class} has no training examples")]
    ClassWithoutExamples { class: usize },

    #[error("class {class} has {count} examples, fewer than the {folds} folds")]
    TooFewExamples {
        class: usize,
        count: usize,
        folds: usize,
    },

    #[error("window length {window} exceeds sequence length {frames}")]
    WindowTooLarge { window: usize, frames: usize },

    #[error("label arrays have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty label array")]
    EmptyLabels,

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("invalid parse: {0}")]
    InvalidParse(String),

    #[error("infeasible generation rule: {0}")]
    InfeasibleRule(String),

    #[error("{path}: {message}")]
    MalformedFile { path: String, message: String },

    #[error("{path}:{line}: {message}")]
    MalformedLine {
        path: String,
        line: usize,
        message: String,
    },

    #[error("unknown label '{0}'")]
    UnknownLabel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
