//! Evaluation metrics and the cross-validation driver.

mod harness;
mod metrics;
mod pipeline;

pub use harness::{cross_validate, EvaluationReport, FoldCurveParams, ReportMetrics, RowResult};
pub use metrics::{coverage, mae, mean_width, r2, AlphaMetrics, PredictionInterval};
pub use pipeline::{
    fit_pipeline, EvalConfig, FittedModel, FittedPipeline, ModelSpec, StackingSpec,
};
