//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Result`]. Validation
//! failures are reported eagerly with enough context (indices, offending
//! values, file positions) to locate the problem in the caller's data.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A hyperedge had fewer than two distinct members (and self-loops were
    /// not explicitly enabled).
    #[error("hyperedge {index} has {distinct} distinct member(s); at least 2 are required")]
    EmptyHyperedge { index: usize, distinct: usize },

    /// A hyperedge referenced a node id outside `0..n`.
    #[error("hyperedge {index} references node {node}, but the hypergraph has {n} nodes")]
    NodeOutOfRange { index: usize, node: usize, n: usize },

    /// A hyperedge weight was zero, negative, or non-finite.
    #[error("hyperedge {index} has invalid weight {weight}; weights must be positive and finite")]
    InvalidWeight { index: usize, weight: f64 },

    /// The weight vector length did not match the number of hyperedges.
    #[error("{count} weight(s) supplied for {m} hyperedge(s)")]
    WeightCountMismatch { count: usize, m: usize },

    /// A node belongs to no hyperedge, so its degree is zero and the
    /// degree-normalized operators are undefined for it.
    #[error(
        "node {node} belongs to no hyperedge; every node must be covered \
         (repair the dataset explicitly, e.g. `preprocess add-self-loops`)"
    )]
    IsolatedNode { node: usize },

    /// Two matrices (or a matrix and the hypergraph) disagree on shape.
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    /// An entry lies outside the domain of the requested mixing function
    /// (e.g. a negative value raised to a fractional power).
    #[error(
        "entry ({row}, {col}) = {value} is outside the domain of the \
         power-mean mixing with exponent {exponent}"
    )]
    DomainError {
        row: usize,
        col: usize,
        value: f64,
        exponent: f64,
    },

    /// A computation produced NaN or infinity.
    #[error("non-finite value produced during {context}")]
    NonFiniteResult { context: String },

    /// A configuration value failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A text input file could not be parsed; `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    ParseError {
        path: String,
        line: usize,
        message: String,
    },

    /// A binary or structured file had the wrong magic, version, or layout.
    #[error("{path}: {message}")]
    BadFileFormat { path: String, message: String },

    /// The training set was empty after validation.
    #[error("training set is empty")]
    EmptyTrainingSet,

    /// The evaluation set was empty after validation.
    #[error("evaluation set is empty")]
    EmptyEvalSet,

    /// A node carried a label outside `0..classes`.
    #[error("node {node} has label {label}, but only {classes} class(es) are declared")]
    LabelOutOfRange {
        node: usize,
        label: usize,
        classes: usize,
    },

    /// A node was selected for training or evaluation but has no label.
    #[error("node {node} was selected but has no label")]
    MissingLabel { node: usize },

    /// A feature matrix contained a negative entry; callers must shift
    /// features into the nonnegative orthant explicitly beforehand.
    #[error(
        "feature entry ({row}, {col}) = {value} is negative; shift features \
         to be nonnegative first (e.g. `preprocess shift-features`)"
    )]
    NegativeFeature { row: usize, col: usize, value: f64 },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure, annotated with the file involved.
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}
