//! Tree ensembles: random forests with quantile-regression-forest intervals,
//! gradient boosting with squared loss, and split-count feature importance.

mod forest;
mod gbm;

pub use forest::{fit_forest, ForestModel, ForestParams};
pub use gbm::{fit_gbm, GbmModel, GbmParams};

use serde::{Deserialize, Serialize};

use crate::tree::TreeModel;

/// Split-count importance: how many internal nodes use each feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureImportance {
    /// Indexed by feature; sums to the total internal-node count.
    pub counts: Vec<u64>,
}

impl FeatureImportance {
    pub(crate) fn from_trees<'a>(
        trees: impl Iterator<Item = &'a TreeModel>,
        n_features: usize,
    ) -> Self {
        let mut counts = vec![0u64; n_features];
        for tree in trees {
            for (feature, count) in tree.split_counts().into_iter().enumerate() {
                counts[feature] += count;
            }
        }
        Self { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// (feature, count) pairs sorted by descending count, then feature index.
    pub fn ranked(&self) -> Vec<(usize, u64)> {
        let mut pairs: Vec<(usize, u64)> = self.counts.iter().copied().enumerate().collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        pairs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::FeatureMatrix;
    use crate::tree::{fit_tree, TreeParams};

    #[test]
    fn single_stump_counts_one_split() {
        let x = FeatureMatrix::from_rows(vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]]);
        let y = [0.0, 0.0, 10.0, 10.0];
        let params = TreeParams {
            max_depth: Some(1),
            min_samples_leaf: 1,
            n_candidate_features: None,
        };
        let tree = fit_tree(&x, &y, &[0, 1, 2, 3], &params, 0).unwrap();
        let fi = FeatureImportance::from_trees(std::iter::once(&tree), 1);
        assert_eq!(fi.counts, vec![1]);
        assert_eq!(fi.total(), 1);
    }

    #[test]
    fn counts_add_across_trees() {
        let x =
            FeatureMatrix::from_rows((0..8).map(|i| vec![0.0, 0.0, i as f64]).collect::<Vec<_>>());
        let y: Vec<f64> = (0..8).map(|i| (i * i) as f64).collect();
        let params = TreeParams {
            max_depth: Some(2),
            min_samples_leaf: 2,
            n_candidate_features: None,
        };
        let rows: Vec<usize> = (0..8).collect();
        let t1 = fit_tree(&x, &y, &rows, &params, 1).unwrap();
        let t2 = fit_tree(&x, &y, &rows, &params, 2).unwrap();
        let fi = FeatureImportance::from_trees([&t1, &t2].into_iter(), 3);
        // constant columns never split; feature 2 carries everything
        assert_eq!(fi.counts[0], 0);
        assert_eq!(fi.counts[1], 0);
        assert_eq!(fi.counts[2], fi.total());
        let total_internal: u64 = [&t1, &t2]
            .iter()
            .map(|t| t.split_counts().iter().sum::<u64>())
            .sum();
        assert_eq!(fi.total(), total_internal);
    }
}
