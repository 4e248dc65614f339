use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("operands live on different phase grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("inadmissible mixture parameters: {0}")]
    Inadmissible(String),

    #[error("degenerate cell {cell}: {reason}")]
    DegenerateCell { cell: usize, reason: String },

    #[error("infeasible moment targets: {0}")]
    InfeasibleTarget(String),

    #[error("negative distribution value {value:e} in species {species} at cell {cell} (max {max:e})")]
    Negativity {
        species: usize,
        cell: usize,
        value: f64,
        max: f64,
    },

    #[error(transparent)]
    Config(#[from] crate::cli::ConfigError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Tags a degenerate-cell error with the cell it came from.
    pub(crate) fn at_cell(self, cell: usize) -> Self {
        match self {
            Error::DegenerateCell { reason, .. } => Error::DegenerateCell { cell, reason },
            other => other,
        }
    }
}
