//! Per-cluster summaries of feature and target distributions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{median, percentile, sorted_mean};
use crate::tabular::{ColumnKind, ColumnRole, Dataset};

use super::kmeans::KMeansModel;

/// Distribution summary of one numeric column within a cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericSummary {
    pub n_observed: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

impl NumericSummary {
    fn from_values(values: &[f64]) -> Self {
        Self {
            n_observed: values.len(),
            mean: sorted_mean(values),
            median: median(values),
            q1: percentile(values, 0.25),
            q3: percentile(values, 0.75),
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Most frequent label of one categorical column within a cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalShare {
    pub mode: String,
    /// Fraction of observed cells carrying the mode label.
    pub share: f64,
    pub n_observed: usize,
}

/// One cluster's profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub count: usize,
    pub numeric: BTreeMap<String, NumericSummary>,
    pub categorical: BTreeMap<String, CategoricalShare>,
    pub target: Option<NumericSummary>,
}

/// Profiles of all clusters of a fitted partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfileReport {
    pub clusters: Vec<ClusterSummary>,
}

/// Summarizes the dataset rows cluster by cluster.
///
/// `ds` must be the same row set (same order) the model was fitted on.
pub fn cluster_profile(ds: &Dataset, model: &KMeansModel) -> Result<ClusterProfileReport> {
    if model.assignments.len() != ds.n_rows() {
        return Err(Error::LengthMismatch {
            left: model.assignments.len(),
            right: ds.n_rows(),
        });
    }
    let mut clusters = Vec::with_capacity(model.k);
    for cluster in 0..model.k {
        let rows: Vec<usize> = model
            .assignments
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(r, _)| r)
            .collect();

        let mut numeric = BTreeMap::new();
        let mut categorical = BTreeMap::new();
        for (idx, col) in ds.schema().columns.iter().enumerate() {
            if col.role != ColumnRole::Feature {
                continue;
            }
            match col.kind {
                ColumnKind::Numeric => {
                    let values: Vec<f64> = rows
                        .iter()
                        .filter_map(|&r| ds.cell(r, idx).as_number())
                        .collect();
                    if !values.is_empty() {
                        numeric.insert(col.name.clone(), NumericSummary::from_values(&values));
                    }
                }
                ColumnKind::Categorical => {
                    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                    let mut observed = 0usize;
                    for &r in &rows {
                        if let Some(label) = ds.cell(r, idx).as_category() {
                            *counts.entry(label).or_default() += 1;
                            observed += 1;
                        }
                    }
                    if observed > 0 {
                        // BTreeMap iteration is lexicographic, so the first
                        // maximal count is the lexicographically smallest mode
                        let (mode, count) = counts
                            .iter()
                            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                            .expect("non-empty counts");
                        categorical.insert(
                            col.name.clone(),
                            CategoricalShare {
                                mode: mode.to_string(),
                                share: *count as f64 / observed as f64,
                                n_observed: observed,
                            },
                        );
                    }
                }
            }
        }

        let target_values: Vec<f64> = rows.iter().filter_map(|&r| ds.target(r)).collect();
        clusters.push(ClusterSummary {
            cluster,
            count: rows.len(),
            numeric,
            categorical,
            target: if target_values.is_empty() {
                None
            } else {
                Some(NumericSummary::from_values(&target_values))
            },
        });
    }
    Ok(ClusterProfileReport { clusters })
}
