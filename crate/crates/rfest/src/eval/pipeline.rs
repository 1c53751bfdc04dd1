//! Model pipeline: target encoding + optional curve stacking + ensemble.
//!
//! A [`FittedPipeline`] bundles everything fitted on a training set so that
//! prediction on unseen rows replays the identical transformations: stacked
//! curve features computed from the stored curve models, categorical columns
//! encoded with the stored maps, then the ensemble. Inside cross-validation
//! each fold fits its own pipeline on training rows only, which is what the
//! leakage tests byte-compare.

use serde::{Deserialize, Serialize};

use crate::conformal::{fit_icp, IcpModel};
use crate::curves::{append_stacked, fit_curve, training_records, CurveFamily, CurveModel};
use crate::ensembles::{fit_forest, ForestModel, ForestParams, GbmParams};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;
use crate::tabular::{apply_target_encoder, fit_target_encoder, Dataset, TargetEncoder};

use super::metrics::PredictionInterval;

/// Which interval-producing model the pipeline trains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    QuantileForest(ForestParams),
    GbmIcp {
        gbm: GbmParams,
        /// Proper-train fraction of the conformal split.
        split_ratio: f64,
    },
}

/// Column names of the production quantities used for stacking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackingSpec {
    pub delta_t_column: String,
    pub ooip_column: String,
    pub cum_prod_column: String,
}

impl Default for StackingSpec {
    fn default() -> Self {
        Self {
            delta_t_column: "delta_t_years".to_string(),
            ooip_column: "ooip_mln_t".to_string(),
            cum_prod_column: "cum_prod_mln_t".to_string(),
        }
    }
}

/// Full evaluation configuration; every random draw derives from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub model: ModelSpec,
    pub stacking: Option<StackingSpec>,
    pub alphas: Vec<f64>,
    pub seed: u64,
}

impl EvalConfig {
    /// Validated, ascending, deduplicated confidence levels.
    pub fn normalized_alphas(&self) -> Result<Vec<f64>> {
        let mut alphas = self.alphas.clone();
        for &alpha in &alphas {
            if !(0.0 < alpha && alpha < 1.0) {
                return Err(Error::InvalidAlpha(alpha));
            }
        }
        alphas.sort_unstable_by(f64::total_cmp);
        alphas.dedup();
        if alphas.is_empty() {
            return Err(Error::EmptyMetricInput);
        }
        Ok(alphas)
    }
}

/// The ensemble part of a fitted pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FittedModel {
    Forest(ForestModel),
    Icp(IcpModel),
}

/// Everything fitted on one training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    /// Matrix columns, in order: encoded schema features plus stacked ones.
    pub feature_columns: Vec<String>,
    pub encoders: Vec<TargetEncoder>,
    /// Fitted (exp_v, hyp_v) curves when stacking is on.
    pub curves: Option<(CurveModel, CurveModel)>,
    pub stacking: Option<StackingSpec>,
    pub model: FittedModel,
    pub seed: u64,
}

/// Fits the whole pipeline on `train`, whose rows must all carry targets.
pub fn fit_pipeline(train: &Dataset, config: &EvalConfig, seed: u64) -> Result<FittedPipeline> {
    let missing_targets = (0..train.n_rows())
        .filter(|&r| train.target(r).is_none())
        .count();
    if train.schema().target_index().is_none() || missing_targets > 0 {
        return Err(Error::ColumnUnusable {
            column: "target".to_string(),
            reason: format!("{missing_targets} training rows lack a target value"),
        });
    }

    // stacking first: curve features are numeric and skip encoding
    let (train, curves) = match &config.stacking {
        Some(spec) => {
            let records = training_records(
                train,
                &spec.delta_t_column,
                &spec.ooip_column,
                &spec.cum_prod_column,
            )?;
            let exp_curve = fit_curve(&records, CurveFamily::ExpV)?;
            let hyp_curve = fit_curve(&records, CurveFamily::HypV)?;
            let augmented = append_stacked(
                train,
                &exp_curve,
                &hyp_curve,
                &spec.delta_t_column,
                &spec.ooip_column,
                &spec.cum_prod_column,
            )?;
            (augmented, Some((exp_curve, hyp_curve)))
        }
        None => (train.clone(), None),
    };

    let mut encoders = Vec::new();
    let mut encoded = train;
    for column in encoded.schema().categorical_feature_names() {
        let encoder = fit_target_encoder(&encoded, &column)?;
        encoded = apply_target_encoder(&encoded, &encoder)?;
        encoders.push(encoder);
    }

    let feature_columns = encoded.schema().feature_names();
    let x = encoded.feature_matrix(&feature_columns)?;
    let y: Vec<f64> = (0..encoded.n_rows())
        .map(|r| encoded.target(r).expect("validated above"))
        .collect();

    let model = match &config.model {
        ModelSpec::QuantileForest(params) => {
            FittedModel::Forest(fit_forest(&x, &y, params, derive_seed(seed, 1))?)
        }
        ModelSpec::GbmIcp { gbm, split_ratio } => {
            FittedModel::Icp(fit_icp(&x, &y, gbm, *split_ratio, derive_seed(seed, 2))?)
        }
    };

    Ok(FittedPipeline {
        feature_columns,
        encoders,
        curves,
        stacking: config.stacking.clone(),
        model,
        seed,
    })
}

impl FittedPipeline {
    /// Replays the fitted transformations on any dataset with the same
    /// feature columns (a target column is not required).
    fn transform(&self, ds: &Dataset) -> Result<Dataset> {
        let mut out = ds.clone();
        if let (Some(spec), Some((exp_curve, hyp_curve))) = (&self.stacking, &self.curves) {
            out = append_stacked(
                &out,
                exp_curve,
                hyp_curve,
                &spec.delta_t_column,
                &spec.ooip_column,
                &spec.cum_prod_column,
            )?;
        }
        for encoder in &self.encoders {
            out = apply_target_encoder(&out, encoder)?;
        }
        Ok(out)
    }

    /// Point prediction and raw (unclamped) intervals for every row.
    pub fn predict_dataset(
        &self,
        ds: &Dataset,
        alphas: &[f64],
    ) -> Result<Vec<(f64, Vec<PredictionInterval>)>> {
        let transformed = self.transform(ds)?;
        let x = transformed.feature_matrix(&self.feature_columns)?;
        let mut out = Vec::with_capacity(x.n_rows());
        for r in 0..x.n_rows() {
            let row = x.row(r);
            let (point, intervals) = match &self.model {
                FittedModel::Forest(forest) => (
                    forest.predict_mean(row)?,
                    forest.qrf_intervals(row, alphas)?,
                ),
                FittedModel::Icp(icp) => {
                    let point = icp.predict(row)?;
                    let intervals = alphas
                        .iter()
                        .map(|&alpha| icp.interval(row, alpha))
                        .collect::<Result<Vec<_>>>()?;
                    (point, intervals)
                }
            };
            out.push((point, intervals));
        }
        Ok(out)
    }

    /// Split-count importance of the underlying ensemble, keyed by the
    /// pipeline's matrix columns.
    pub fn feature_importance(&self) -> Vec<(String, u64)> {
        let importance = match &self.model {
            FittedModel::Forest(forest) => forest.feature_importance(),
            FittedModel::Icp(icp) => icp.gbm.feature_importance(),
        };
        self.feature_columns
            .iter()
            .cloned()
            .zip(importance.counts.iter().copied())
            .collect()
    }
}
