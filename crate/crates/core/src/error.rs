use alloc::string::String;

/// Errors raised by the pure pipeline stages.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("undefined input: {0}")]
    UndefinedInput(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("class `{class}` has {count} members, fewer than the {folds} folds requested")]
    Stratification {
        class: String,
        count: usize,
        folds: usize,
    },
    #[error("class `{0}` has fewer than two members and cannot be oversampled")]
    TooFewToOversample(String),
    #[error("feature width mismatch: model expects {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
