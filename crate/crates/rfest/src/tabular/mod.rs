//! Dataset representation and preprocessing.
//!
//! A [`Dataset`] couples a [`Schema`] (column names, numeric/categorical
//! kinds, feature/target/meta roles) with rows of cells that may be missing.
//! Targets are recovery factors in percent and must lie in [0, 100] when
//! present. The module also owns CSV ingestion, target encoding of
//! categorical features, cross-validation fold construction, z-score
//! standardization with median imputation, and threshold row filtering.

mod csv_io;
mod dataset;
mod encode;
mod folds;
mod scale;
mod schema;

pub use csv_io::{load_csv, write_csv, MissingMarkers};
pub use dataset::{Cell, Dataset, FeatureMatrix};
pub use encode::{apply_target_encoder, fit_target_encoder, TargetEncoder};
pub use folds::{make_folds, FoldPlan, FoldSpec};
pub use scale::{standardize, ColumnScale};
pub use schema::{ColumnKind, ColumnRole, ColumnSchema, Schema};
