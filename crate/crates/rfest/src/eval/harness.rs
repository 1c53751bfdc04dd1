//! Cross-validation driver and evaluation report.
//!
//! Each fold fits a fresh pipeline (encoders, curve models, ensemble) on its
//! training rows only and predicts the held-out rows. Folds are independent
//! and may run in parallel; results merge in fold-index order, so a report is
//! a pure function of (dataset, config, fold plan). Reported predictions and
//! intervals are clamped to [0, 100] — raw model outputs stay internal.

use serde::{Deserialize, Serialize};

use crate::curves::CurveModel;
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::seeding::derive_seed;
use crate::tabular::{Dataset, FoldPlan};

use super::metrics::{coverage, mae, mean_width, r2, AlphaMetrics, PredictionInterval};
use super::pipeline::{fit_pipeline, EvalConfig};

/// One evaluated row: truth, clamped prediction and clamped intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowResult {
    pub row: usize,
    pub fold: usize,
    pub y_true: f64,
    pub y_hat: f64,
    pub intervals: Vec<PredictionInterval>,
}

/// Aggregate metrics of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetrics {
    pub mae: f64,
    pub r2: f64,
    pub per_alpha: Vec<AlphaMetrics>,
}

/// Curve parameters fitted inside one fold (stacking runs only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldCurveParams {
    pub fold: usize,
    pub exp_v: CurveModel,
    pub hyp_v: CurveModel,
}

/// Full cross-validation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub version: String,
    pub config: EvalConfig,
    pub alphas: Vec<f64>,
    pub fold_k: usize,
    pub leave_one_out: bool,
    pub fold_seed: u64,
    pub n_rows: usize,
    pub metrics: ReportMetrics,
    pub curve_params: Vec<FoldCurveParams>,
    pub rows: Vec<RowResult>,
}

/// Runs the cross-validation protocol described by `config` over `plan`.
///
/// Every dataset row must carry a target (the CLI filters and counts rows
/// without one before building the plan).
pub fn cross_validate(
    ds: &Dataset,
    config: &EvalConfig,
    plan: &FoldPlan,
) -> Result<EvaluationReport> {
    if plan.n_rows() != ds.n_rows() {
        return Err(Error::FoldPlanMismatch {
            plan: plan.n_rows(),
            dataset: ds.n_rows(),
        });
    }
    let alphas = config.normalized_alphas()?;

    struct FoldOutcome {
        rows: Vec<RowResult>,
        curves: Option<FoldCurveParams>,
    }

    let outcomes: Vec<Result<FoldOutcome>> = map_indexed(plan.k, |fold| {
        let train_rows = plan.train_rows(fold);
        let test_rows = plan.fold_rows(fold);
        let train = ds.select_rows(&train_rows);
        let pipeline = fit_pipeline(&train, config, derive_seed(config.seed, fold as u64))
            .map_err(|e| Error::FoldModelIncompatible {
                fold,
                reason: e.to_string(),
            })?;
        let test = ds.select_rows(&test_rows);
        let predictions = pipeline.predict_dataset(&test, &alphas)?;
        let rows = test_rows
            .iter()
            .zip(predictions)
            .map(|(&row, (point, intervals))| RowResult {
                row,
                fold,
                y_true: ds.target(row).expect("targets validated by fit_pipeline"),
                y_hat: point.clamp(0.0, 100.0),
                intervals: intervals.iter().map(PredictionInterval::clamped).collect(),
            })
            .collect();
        Ok(FoldOutcome {
            rows,
            curves: pipeline
                .curves
                .as_ref()
                .map(|(exp_v, hyp_v)| FoldCurveParams {
                    fold,
                    exp_v: exp_v.clone(),
                    hyp_v: hyp_v.clone(),
                }),
        })
    });

    let mut rows: Vec<RowResult> = Vec::with_capacity(ds.n_rows());
    let mut curve_params = Vec::new();
    for outcome in outcomes {
        let outcome = outcome?;
        rows.extend(outcome.rows);
        if let Some(curves) = outcome.curves {
            curve_params.push(curves);
        }
    }
    rows.sort_by_key(|r| r.row);

    let metrics = compute_metrics(&rows, &alphas)?;
    Ok(EvaluationReport {
        version: crate::VERSION.to_string(),
        config: config.clone(),
        alphas,
        fold_k: plan.k,
        leave_one_out: plan.leave_one_out,
        fold_seed: plan.seed,
        n_rows: ds.n_rows(),
        metrics,
        curve_params,
        rows,
    })
}

/// Recomputes the aggregate metrics from per-row results.
pub(crate) fn compute_metrics(rows: &[RowResult], alphas: &[f64]) -> Result<ReportMetrics> {
    let y: Vec<f64> = rows.iter().map(|r| r.y_true).collect();
    let y_hat: Vec<f64> = rows.iter().map(|r| r.y_hat).collect();
    let per_alpha = alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let intervals: Vec<PredictionInterval> = rows.iter().map(|r| r.intervals[i]).collect();
            Ok(AlphaMetrics {
                alpha,
                coverage: coverage(&intervals, &y)?,
                mean_width: mean_width(&intervals)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReportMetrics {
        mae: mae(&y, &y_hat)?,
        r2: r2(&y, &y_hat)?,
        per_alpha,
    })
}
