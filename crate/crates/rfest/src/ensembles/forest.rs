//! Random forests reused as quantile regression forests.
//!
//! Each tree is fit on an independent bootstrap resample (size n, with
//! replacement) and retains its leaf membership, counted with bootstrap
//! multiplicity. Besides the usual mean prediction, the forest exposes the
//! conditional-distribution machinery: per-row weights, quantiles via the
//! left-continuous inverse of the weighted empirical CDF, and central
//! prediction intervals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::PredictionInterval;
use crate::exec::map_indexed;
use crate::seeding::{derive_seed, stream_rng};
use crate::tabular::FeatureMatrix;
use crate::tree::{fit_tree, TreeModel, TreeParams};

use super::FeatureImportance;

/// Forest hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub min_samples_leaf: usize,
    /// `None` grows each tree until no admissible split remains.
    pub max_depth: Option<u32>,
    /// Candidate features per split; `None` resolves to ceil(d / 3).
    pub n_candidate_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 500,
            min_samples_leaf: 5,
            max_depth: None,
            n_candidate_features: None,
        }
    }
}

/// A fitted forest, immutable and safe for concurrent prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    /// Params with the candidate-feature count resolved against d.
    pub params: ForestParams,
    pub seed: u64,
    /// Training targets, indexed like the leaf members.
    pub targets: Vec<f64>,
}

/// Fits `params.n_trees` trees on bootstrap resamples; deterministic in seed.
///
/// Tree `t` draws its bootstrap sample and feature subsets from generators
/// derived from `(seed, t)`, so any parallel schedule yields the same model.
pub fn fit_forest(
    x: &FeatureMatrix,
    y: &[f64],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel> {
    let n = x.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows {
            n,
            reason: "forest needs at least 2 rows".to_string(),
        });
    }
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: n,
        });
    }
    let d = x.n_cols();
    let resolved = ForestParams {
        n_candidate_features: Some(
            params
                .n_candidate_features
                .unwrap_or_else(|| d.div_ceil(3))
                .clamp(1, d.max(1)),
        ),
        ..*params
    };
    let tree_params = TreeParams {
        max_depth: resolved.max_depth,
        min_samples_leaf: resolved.min_samples_leaf,
        n_candidate_features: resolved.n_candidate_features,
    };

    let trees: Result<Vec<TreeModel>> = map_indexed(resolved.n_trees.max(1), |t| {
        let mut bootstrap_rng = stream_rng(seed, 2 * t as u64 + 1);
        let rows: Vec<usize> = (0..n).map(|_| bootstrap_rng.random_range(0..n)).collect();
        fit_tree(x, y, &rows, &tree_params, derive_seed(seed, t as u64))
    })
    .into_iter()
    .collect();

    Ok(ForestModel {
        trees: trees?,
        params: resolved,
        seed,
        targets: y.to_vec(),
    })
}

impl ForestModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.trees.first().map_or(0, |t| t.n_features)
    }

    /// Bootstrap row multiset of one tree, reconstructed from its leaves.
    pub fn bootstrap_rows(&self, tree: usize) -> Vec<u32> {
        let t = &self.trees[tree];
        let mut rows: Vec<u32> = t
            .leaf_ids()
            .into_iter()
            .flat_map(|id| t.leaf_members(id).iter().copied())
            .collect();
        rows.sort_unstable();
        rows
    }

    fn check_arity(&self, row: &[f64]) -> Result<()> {
        let expected = self.n_features();
        if row.len() != expected {
            return Err(Error::FeatureArity {
                found: row.len(),
                expected,
            });
        }
        Ok(())
    }

    /// Arithmetic mean of the per-tree predictions.
    pub fn predict_mean(&self, row: &[f64]) -> Result<f64> {
        self.check_arity(row)?;
        let sum: f64 = self.trees.iter().map(|t| t.predict_unchecked(row).1).sum();
        Ok(sum / self.trees.len() as f64)
    }

    /// QRF weight of every training row for the query point.
    ///
    /// Row i gets the average over trees of (its multiplicity in the leaf
    /// containing `row`) / (leaf size); the weights sum to one.
    pub fn qrf_weights(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_arity(row)?;
        let mut weights = vec![0.0; self.targets.len()];
        for tree in &self.trees {
            let (leaf, _) = tree.predict_unchecked(row);
            let members = tree.leaf_members(leaf);
            let w = 1.0 / members.len() as f64;
            for &r in members {
                weights[r as usize] += w;
            }
        }
        let t = self.trees.len() as f64;
        for w in &mut weights {
            *w /= t;
        }
        Ok(weights)
    }

    /// Conditional quantile: smallest training target whose weighted
    /// empirical CDF reaches `q` (left-continuous inverse, no interpolation).
    pub fn qrf_quantile(&self, row: &[f64], q: f64) -> Result<f64> {
        if !(0.0 < q && q < 1.0) {
            return Err(Error::InvalidQuantile(q));
        }
        let weights = self.qrf_weights(row)?;
        Ok(quantiles_from_weights(&self.targets, &weights, &[q])[0])
    }

    /// Central prediction interval [Q_{(1-a)/2}, Q_{(1+a)/2}].
    pub fn qrf_interval(&self, row: &[f64], alpha: f64) -> Result<PredictionInterval> {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        let weights = self.qrf_weights(row)?;
        let qs = [(1.0 - alpha) / 2.0, (1.0 + alpha) / 2.0];
        let bounds = quantiles_from_weights(&self.targets, &weights, &qs);
        Ok(PredictionInterval {
            lower: bounds[0],
            upper: bounds[1],
            alpha,
        })
    }

    /// Intervals for several confidence levels, sharing one weight pass.
    pub fn qrf_intervals(&self, row: &[f64], alphas: &[f64]) -> Result<Vec<PredictionInterval>> {
        for &alpha in alphas {
            if !(0.0 < alpha && alpha < 1.0) {
                return Err(Error::InvalidAlpha(alpha));
            }
        }
        let weights = self.qrf_weights(row)?;
        Ok(alphas
            .iter()
            .map(|&alpha| {
                let qs = [(1.0 - alpha) / 2.0, (1.0 + alpha) / 2.0];
                let bounds = quantiles_from_weights(&self.targets, &weights, &qs);
                PredictionInterval {
                    lower: bounds[0],
                    upper: bounds[1],
                    alpha,
                }
            })
            .collect())
    }

    pub fn feature_importance(&self) -> FeatureImportance {
        FeatureImportance::from_trees(self.trees.iter(), self.n_features())
    }
}

/// Evaluates quantiles of the weighted empirical CDF over `targets`.
///
/// A cumulative weight within 1e-12 of `q` counts as reaching it, absorbing
/// accumulation roundoff (weights are sums of 1/leaf-size terms).
fn quantiles_from_weights(targets: &[f64], weights: &[f64], qs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_unstable_by(|&a, &b| targets[a].total_cmp(&targets[b]).then(a.cmp(&b)));
    qs.iter()
        .map(|&q| {
            let mut cum = 0.0;
            for &i in &order {
                cum += weights[i];
                if cum >= q - 1e-12 {
                    return targets[i];
                }
            }
            targets[order[targets.len() - 1]]
        })
        .collect()
}
