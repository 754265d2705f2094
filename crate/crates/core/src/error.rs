//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mode {mode} for order-{order} tensor")]
    InvalidMode { mode: usize, order: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank > dimension: rank {rank} exceeds extent {dim} at mode {mode}")]
    RankExceedsDim { mode: usize, rank: usize, dim: usize },

    #[error("too many neighbors: p={p} with {n_samples} samples")]
    TooManyNeighbors { p: usize, n_samples: usize },

    #[error("non-finite value encountered in {context}{}", match .iteration {
        Some(it) => format!(" at iteration {it}"),
        None => String::new(),
    })]
    NonFinite {
        context: String,
        iteration: Option<usize>,
    },

    #[error("singular projection")]
    SingularProjection,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures caused by non-finite arithmetic rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
