use thiserror::Error;

/// Which side of a matrix an index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

/// Errors produced by the library. Indices carried by variants are 0-based;
/// the `Display` impls print them 1-based to match the file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column (got {n_rows}x{n_cols})")]
    EmptyShape { n_rows: usize, n_cols: usize },

    #[error("entry ({}, {}) is out of range for a {n_rows}x{n_cols} matrix", .row + 1, .col + 1)]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },

    #[error("duplicate entry at ({}, {})", .row + 1, .col + 1)]
    DuplicateEntry { row: usize, col: usize },

    #[error("entry ({}, {}) has value {value}; stored values must be finite and > 0", .row + 1, .col + 1)]
    NonpositiveEntry { row: usize, col: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("{axis} {} has no stored entries", .index + 1)]
    ZeroRowOrColumn { axis: Axis, index: usize },

    #[error("target entry {value} at {axis} {} must be finite and > 0", .index + 1)]
    NonpositiveTarget {
        axis: Axis,
        index: usize,
        value: f64,
    },

    #[error("row targets sum to {row_sum} but column targets sum to {col_sum}")]
    TargetSumMismatch { row_sum: f64, col_sum: f64 },

    #[error("delta must be finite and > 0 (got {0})")]
    NonpositiveDelta(f64),

    #[error("theta must be finite and > 0 (got {0})")]
    NonpositiveTheta(f64),

    #[error("epsilon must be finite and > 0 (got {0})")]
    NonpositiveEpsilon(f64),

    #[error("vectors have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("not a probability vector: {0}")]
    InvalidDistribution(String),

    #[error("{axis} {} summed to zero during normalization", .index + 1)]
    InternalZeroSum { axis: Axis, index: usize },

    #[error("witness {axis} {} sums to {found}, expected {expected}", .index + 1)]
    WitnessInfeasible {
        axis: Axis,
        index: usize,
        expected: f64,
        found: f64,
    },

    #[error("witness has entry ({}, {}) outside the support of the matrix", .row + 1, .col + 1)]
    WitnessSupportViolation { row: usize, col: usize },

    #[error("matrix is neither row- nor column-stochastic")]
    NotStochastic,

    #[error("expected a square matrix or balanced graph, got {n_rows}x{n_cols}")]
    NotSquare { n_rows: usize, n_cols: usize },

    #[error("epsilon must lie in (0, 1) (got {0})")]
    EpsilonOutOfRange(f64),

    #[error("generator could not produce a scalable support after {attempts} attempts")]
    DegenerateSupport { attempts: usize },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
