//! Recovery-factor estimation for oil reservoirs with calibrated prediction
//! intervals.
//!
//! The crate provides the full modelling stack:
//!
//! - [`tabular`] — column-schema datasets with explicit missing cells, CSV
//!   ingestion, target encoding, fold construction, standardization and row
//!   filtering.
//! - [`tree`] — regression trees with variance-reduction splits and learned
//!   routing of missing values.
//! - [`ensembles`] — random forests reused as quantile regression forests
//!   (QRF) for conditional-distribution intervals, gradient boosting with
//!   squared loss, and split-count feature importance.
//! - [`conformal`] — inductive conformal prediction wrapping the boosting
//!   model with absolute-residual nonconformity scores.
//! - [`curves`] — general cumulative-production curve fitting (exponential
//!   and hyperbolic families, optionally OOIP-dependent) and the stacked
//!   recovery-factor features derived from them.
//! - [`cluster`] — k-means++ with Lloyd iterations, silhouette diagnostics,
//!   exact t-SNE embeddings and per-cluster profiling.
//! - [`eval`] — MAE/R²/coverage/mean-width metrics and the leakage-safe
//!   cross-validation driver.
//! - [`synth`] — deterministic synthetic reservoir scenarios used by the
//!   test suites and as runnable demos.
//! - [`model_io`] — the versioned model file format shared by the CLI.
//!
//! Targets are recovery factors in percent of original oil in place; every
//! fitted artifact is immutable after construction and safe to read
//! concurrently. With the default `parallel` feature, ensemble fitting,
//! cross-validation folds and pairwise-distance kernels run on rayon;
//! results are identical to the sequential fallback because all randomness
//! is derived from explicit seeds and reductions happen in index order.

pub mod cluster;
pub mod conformal;
pub mod curves;
pub mod ensembles;
pub mod error;
pub mod eval;
pub mod model_io;
pub mod synth;
pub mod tabular;
pub mod tree;

pub(crate) mod exec;
pub mod seeding;
pub(crate) mod stats;

pub use error::{Error, Result};

/// Crate version stamped into reports and model files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
