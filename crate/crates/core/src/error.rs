use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn first_reject(rejects: &[String]) -> String {
    match rejects {
        [] => String::new(),
        [one] => format!(" ({one})"),
        [first, rest @ ..] => format!(" ({first}; {} more rejected)", rest.len()),
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Holds the rejection message of every non-blank line.
    #[error("dataset contains no valid sequences{}", first_reject(.0))]
    EmptyDataset(Vec<String>),
    #[error("empty sequence: nothing to pad or truncate")]
    EmptySequence,
    #[error("degenerate screen: width must be positive")]
    DegenerateScreen,
    #[error("degenerate class distribution: {0}")]
    DegenerateClass(String),
    #[error("insufficient neighbors: minority class has {minority} items, k_neighbors = {k}")]
    InsufficientNeighbors { minority: usize, k: usize },
    #[error("stratification: class {label} has {count} items, fewer than k = {k}")]
    Stratification {
        label: &'static str,
        count: usize,
        k: usize,
    },
    #[error("undefined AUC: scores need both classes")]
    UndefinedAuc,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("degenerate validation set: {0}")]
    DegenerateValidation(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
