//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LcaError {
    /// Schema file or schema contents violate an invariant.
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    /// A data cell could not be interpreted. Row numbers are 1-based data
    /// rows (the header is row 0).
    #[error("row {row}, column '{column}': {message}")]
    ParseCell {
        row: usize,
        column: String,
        message: String,
    },

    /// Malformed input file (bad header, ragged row, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The file had a header but no data rows.
    #[error("empty dataset")]
    EmptyDataset,

    /// Listwise deletion removed every row.
    #[error("no complete cases")]
    NoCompleteCases,

    /// An operation that requires complete data saw a missing cell.
    #[error("incomplete data: row {row} has a missing cell (column '{column}')")]
    IncompleteData { row: usize, column: String },

    /// Parameter vectors violate the probability invariants.
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// A response vector has zero density under every class.
    #[error("impossible observation at row {row}")]
    ImpossibleObservation { row: usize },

    /// A class lost all posterior mass during an M-step.
    #[error("empty class {class} during EM update")]
    EmptyClass { class: usize },

    /// The requested model fails an identifiability bound.
    #[error("model not identifiable: {0}")]
    Unidentifiable(String),

    /// No candidate class count produced a converged fit.
    #[error("no converged fit in sweep")]
    NoConvergedFit,

    /// Automatic bias designation chose the same class for both roles.
    #[error("bias classes not separable: class {class} maximizes both extreme-outcome means")]
    BiasClassesNotSeparable { class: usize },

    /// Two structures that must share a shape do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A scalar argument is out of its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LcaError>;
