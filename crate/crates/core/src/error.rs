use thiserror::Error;

use crate::dense::ComplexMatrix;

pub type Result<T, E = SylvError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SylvError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {name} at ({row}, {col})")]
    NonFinite {
        name: String,
        row: usize,
        col: usize,
    },

    #[error("pencil is singular")]
    SingularPencil,

    /// Fewer copies of the dimension-induced eigenvalue than the sizes force.
    /// Only reachable through rounding; reported instead of patched.
    #[error("expected at least {expected} dimension-induced eigenvalues at {at}, found {found}")]
    DimensionInducedUndercount {
        at: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{0} is singular")]
    SingularMatrix(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The reduction found a nontrivial solution of the homogeneous equation
    /// while looking for its square core.
    #[error("homogeneous equation has a nontrivial solution")]
    Nonunique { witness: ComplexMatrix },

    #[error("{0}")]
    Format(String),

    /// A malformed instance file, anchored to the offending line.
    #[error("line {line}, column {column}: {message}")]
    Input {
        line: usize,
        column: usize,
        message: String,
    },
}
