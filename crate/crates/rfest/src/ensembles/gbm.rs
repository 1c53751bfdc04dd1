//! Gradient boosting over regression trees with squared loss.
//!
//! Stage m fits a tree to the residuals y - F_{m-1}(X) — the negative
//! gradient of the squared loss — and adds it scaled by the shrinkage.
//! Because leaf values are residual means, the training MSE is
//! non-increasing in the stage index for any shrinkage in (0, 1].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::derive_seed;
use crate::tabular::FeatureMatrix;
use crate::tree::{fit_tree, TreeModel, TreeParams};

use super::FeatureImportance;

/// Boosting hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmParams {
    /// Number of boosting stages M.
    pub n_stages: usize,
    /// Shrinkage in (0, 1].
    pub shrinkage: f64,
    pub max_depth: Option<u32>,
    pub min_samples_leaf: usize,
}

impl Default for GbmParams {
    fn default() -> Self {
        Self {
            n_stages: 300,
            shrinkage: 0.1,
            max_depth: Some(3),
            min_samples_leaf: 5,
        }
    }
}

/// A fitted boosting model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    /// Initial constant: the training target mean.
    pub f0: f64,
    pub shrinkage: f64,
    pub trees: Vec<TreeModel>,
    pub params: GbmParams,
    pub seed: u64,
}

/// Fits the boosting model; deterministic in seed.
pub fn fit_gbm(x: &FeatureMatrix, y: &[f64], params: &GbmParams, seed: u64) -> Result<GbmModel> {
    let n = x.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows {
            n,
            reason: "boosting needs at least 2 rows".to_string(),
        });
    }
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: n,
        });
    }
    if !(params.shrinkage > 0.0 && params.shrinkage <= 1.0) {
        return Err(Error::InvalidShrinkage(params.shrinkage));
    }
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        n_candidate_features: None,
    };
    let rows: Vec<usize> = (0..n).collect();

    let f0 = crate::stats::sorted_mean(y);
    let mut current: Vec<f64> = vec![f0; n];
    let mut residuals: Vec<f64> = y.iter().zip(&current).map(|(t, f)| t - f).collect();
    let mut trees = Vec::with_capacity(params.n_stages);
    for stage in 0..params.n_stages {
        let tree = fit_tree(
            x,
            &residuals,
            &rows,
            &tree_params,
            derive_seed(seed, stage as u64),
        )?;
        for (i, (f, r)) in current.iter_mut().zip(&mut residuals).enumerate() {
            *f += params.shrinkage * tree.predict_unchecked(x.row(i)).1;
            *r = y[i] - *f;
        }
        trees.push(tree);
    }

    Ok(GbmModel {
        f0,
        shrinkage: params.shrinkage,
        trees,
        params: *params,
        seed,
    })
}

impl GbmModel {
    pub fn n_stages(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.trees.first().map_or(0, |t| t.n_features)
    }

    fn check_arity(&self, row: &[f64]) -> Result<()> {
        // A zero-stage model accepts any arity: it is the constant f0.
        if self.trees.is_empty() {
            return Ok(());
        }
        let expected = self.n_features();
        if row.len() != expected {
            return Err(Error::FeatureArity {
                found: row.len(),
                expected,
            });
        }
        Ok(())
    }

    /// Full prediction F0 + shrinkage * sum of tree outputs.
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        self.staged_predict(row, self.trees.len())
    }

    /// Prediction truncated to the first `m` stages (m = 0 gives F0).
    pub fn staged_predict(&self, row: &[f64], m: usize) -> Result<f64> {
        if m > self.trees.len() {
            return Err(Error::StageOutOfRange {
                m,
                stages: self.trees.len(),
            });
        }
        self.check_arity(row)?;
        let mut value = self.f0;
        for tree in &self.trees[..m] {
            value += self.shrinkage * tree.predict_unchecked(row).1;
        }
        Ok(value)
    }

    pub fn feature_importance(&self) -> FeatureImportance {
        FeatureImportance::from_trees(self.trees.iter(), self.n_features())
    }
}
