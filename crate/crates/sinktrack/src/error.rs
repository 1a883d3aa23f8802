use thiserror::Error;

/// Errors produced by solvers, cost builders, generators and frame I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("cost entry at {index:?} is not finite")]
    NonFiniteCost { index: Vec<usize> },

    #[error(
        "numerical underflow/overflow at lambda * max_cost = {scale:.3e}; \
         enable SolverOptions::stabilized to solve in the log domain"
    )]
    NeedsStabilization { scale: f64 },

    #[error("invalid mass vector: {0}")]
    InvalidMass(String),

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("oracle limited to d <= {max}, got d = {d}")]
    OracleTooLarge { d: usize, max: usize },

    #[error("dense tensor limited to d <= {max}, got d = {d}")]
    TensorTooLarge { d: usize, max: usize },

    #[error("matrix rows have unequal lengths (row {row} has {len}, expected {expected})")]
    RaggedRows {
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
