//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by dataset handling, model fitting and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error(
        "csv header mismatch: expected column {expected:?} at position {position}, found {found:?}"
    )]
    HeaderMismatch {
        position: usize,
        expected: String,
        found: String,
    },

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("column {0:?} not found")]
    ColumnNotFound(String),

    #[error("column {column:?}: expected {expected} column")]
    ColumnKindMismatch { column: String, expected: String },

    #[error("column {0:?} has zero variance")]
    ZeroVariance(String),

    #[error("column {column:?}: {reason}")]
    ColumnUnusable { column: String, reason: String },

    #[error("target value {value} at row {row} outside [0, 100]")]
    TargetOutOfRange { row: usize, value: f64 },

    #[error("row {row} has {found} cells, schema has {expected} columns")]
    RowArity {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("fold count {k} out of range for {n} rows")]
    FoldCount { k: usize, n: usize },

    #[error("feature row has {found} values, model expects {expected}")]
    FeatureArity { found: usize, expected: usize },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("training set of {n} rows too small: {reason}")]
    TooFewRows { n: usize, reason: String },

    #[error("quantile level {0} outside (0, 1)")]
    InvalidQuantile(f64),

    #[error("confidence level {0} outside (0, 1)")]
    InvalidAlpha(f64),

    #[error("shrinkage {0} outside (0, 1]")]
    InvalidShrinkage(f64),

    #[error("stage {m} out of range, model has {stages} stages")]
    StageOutOfRange { m: usize, stages: usize },

    #[error("degenerate calibration split: {0}")]
    DegenerateSplit(String),

    #[error("curve fitting failed: {0}")]
    CurveFit(String),

    #[error("curve evaluation: effective slope parameter {0} is not positive")]
    NonPositiveSlope(f64),

    #[error("invalid curve record: {0}")]
    InvalidRecord(String),

    #[error(
        "clustering requires complete rows: row {row} has a missing value in column {column:?}"
    )]
    IncompleteRow { row: usize, column: String },

    #[error("cluster count {k} out of range for {n} rows")]
    ClusterCount { k: usize, n: usize },

    #[error("perplexity {perplexity} infeasible for {n} points")]
    PerplexityInfeasible { perplexity: f64, n: usize },

    #[error("perplexity search did not converge for point {point}")]
    PerplexityNotConverged { point: usize },

    #[error("non-finite {what} encountered during embedding at iteration {iteration}")]
    NonFiniteEmbedding { what: String, iteration: usize },

    #[error("metric input lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("metric input is empty")]
    EmptyMetricInput,

    #[error("coefficient of determination undefined: target values are constant")]
    ConstantTarget,

    #[error("fold plan covers {plan} rows, dataset has {dataset}")]
    FoldPlanMismatch { plan: usize, dataset: usize },

    #[error("fold {fold} incompatible with model: {reason}")]
    FoldModelIncompatible { fold: usize, reason: String },

    #[error("invalid scenario config: {0}")]
    InvalidScenario(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("model file major version {found} is newer than supported {supported}")]
    ModelVersionTooNew { found: u32, supported: u32 },

    #[error("schema mismatch between model and dataset: {0}")]
    SchemaMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
