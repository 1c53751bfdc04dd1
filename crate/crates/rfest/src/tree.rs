//! Regression decision trees with learned routing of missing values.
//!
//! Split search maximizes the reduction in sum of squared errors over all
//! (midpoint threshold, missing direction) pairs. Candidate thresholds are
//! midpoints of consecutive distinct observed values; every candidate is
//! evaluated with the node's missing rows routed left and routed right, and
//! the loss decides the stored direction. Missing values never create a
//! third branch.
//!
//! Tie-breaking is fully deterministic: maximize gain, then lowest feature
//! index within the sampled candidate set, then lowest threshold, then
//! missing routed left. Node aggregates (means, SSE) are computed in
//! value-sorted order, so fitting is invariant to row permutation given the
//! same sampler seed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::stream_rng;
use crate::stats::{sorted_mean, sorted_sse};
use crate::tabular::FeatureMatrix;

/// Which child receives rows whose split feature is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingDirection {
    Left,
    Right,
}

/// A fitted split: feature, midpoint threshold, missing routing and its gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDecision {
    pub feature: usize,
    pub threshold: f64,
    pub missing: MissingDirection,
    /// Reduction in sum of squared errors achieved by the split.
    pub gain: f64,
}

impl SplitDecision {
    /// True when a feature value routes to the left child.
    pub fn goes_left(&self, value: f64) -> bool {
        if value.is_nan() {
            self.missing == MissingDirection::Left
        } else {
            value < self.threshold
        }
    }
}

/// One node of a fitted tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        split: SplitDecision,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Mean target of the member rows.
        value: f64,
        /// Training-row indices that reached this leaf, with bootstrap
        /// multiplicity. Drives the QRF conditional-distribution weights.
        members: Vec<u32>,
    },
}

/// Tree growth hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until no admissible split remains.
    pub max_depth: Option<u32>,
    pub min_samples_leaf: usize,
    /// Candidate features drawn without replacement per node; `None` uses all.
    pub n_candidate_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 5,
            n_candidate_features: None,
        }
    }
}

/// A fitted regression tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    pub params: TreeParams,
}

/// Gains at or below noise level are treated as no improvement.
fn gain_epsilon(parent_sse: f64) -> f64 {
    1e-12 * parent_sse.max(1.0)
}

/// Children SSE from sufficient statistics, clamped at zero.
fn sse_from_sums(n: f64, sum: f64, sum_sq: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    (sum_sq - sum * sum / n).max(0.0)
}

struct Candidate {
    threshold: f64,
    missing: MissingDirection,
    children_sse: f64,
}

/// Scans one feature of a node for the children-SSE-minimizing candidate.
///
/// `pairs` must already be (value, target) with NaN values allowed. Iterates
/// thresholds ascending, left direction first, accepting only strict
/// improvements, which realizes the documented tie-breaking.
fn scan_feature(values: &[f64], targets: &[f64], min_samples_leaf: usize) -> Option<Candidate> {
    let min_leaf = min_samples_leaf.max(1);
    let mut present: Vec<(f64, f64)> = Vec::with_capacity(values.len());
    let mut missing_targets: Vec<f64> = Vec::new();
    for (&v, &t) in values.iter().zip(targets) {
        if v.is_nan() {
            missing_targets.push(t);
        } else {
            present.push((v, t));
        }
    }
    if present.len() < 2 {
        return None;
    }
    present.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    missing_targets.sort_unstable_by(f64::total_cmp);

    let mut miss_sum = 0.0;
    let mut miss_sq = 0.0;
    for &t in &missing_targets {
        miss_sum += t;
        miss_sq += t * t;
    }
    let miss_n = missing_targets.len();

    let total_n = present.len() + miss_n;
    let mut total_sum = miss_sum;
    let mut total_sq = miss_sq;
    for &(_, t) in &present {
        total_sum += t;
        total_sq += t * t;
    }

    let mut best: Option<Candidate> = None;
    let mut cum_sum = present[0].1;
    let mut cum_sq = present[0].1 * present[0].1;
    for i in 1..present.len() {
        let (prev_v, _) = present[i - 1];
        let (v, t) = present[i];
        if v > prev_v {
            let threshold = (prev_v + v) / 2.0;
            // Adjacent floats can collapse the midpoint onto the lower value;
            // such a threshold would not separate the groups.
            if threshold > prev_v {
                let directions: &[MissingDirection] = if miss_n == 0 {
                    &[MissingDirection::Left]
                } else {
                    &[MissingDirection::Left, MissingDirection::Right]
                };
                for &missing in directions {
                    let (left_n, left_sum, left_sq) = match missing {
                        MissingDirection::Left => {
                            (i + miss_n, cum_sum + miss_sum, cum_sq + miss_sq)
                        }
                        MissingDirection::Right => (i, cum_sum, cum_sq),
                    };
                    let right_n = total_n - left_n;
                    if left_n < min_leaf || right_n < min_leaf {
                        continue;
                    }
                    let children_sse = sse_from_sums(left_n as f64, left_sum, left_sq)
                        + sse_from_sums(right_n as f64, total_sum - left_sum, total_sq - left_sq);
                    if best.as_ref().is_none_or(|b| children_sse < b.children_sse) {
                        best = Some(Candidate {
                            threshold,
                            missing,
                            children_sse,
                        });
                    }
                }
            }
        }
        cum_sum += t;
        cum_sq += t * t;
    }
    best
}

/// Routes node targets through a candidate, returning (left, right) targets.
fn route_targets(
    values: &[f64],
    targets: &[f64],
    threshold: f64,
    missing: MissingDirection,
) -> (Vec<f64>, Vec<f64>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    let probe = SplitDecision {
        feature: 0,
        threshold,
        missing,
        gain: 0.0,
    };
    for (&v, &t) in values.iter().zip(targets) {
        if probe.goes_left(v) {
            left.push(t);
        } else {
            right.push(t);
        }
    }
    (left, right)
}

/// Exhaustive single-feature split search.
///
/// Returns the (threshold, missing direction) pair that maximizes the SSE
/// reduction subject to both children holding at least `min_samples_leaf`
/// rows, or `None` when no candidate achieves a positive gain. The returned
/// decision has `feature == 0`.
pub fn best_split(
    feature_values: &[f64],
    targets: &[f64],
    min_samples_leaf: usize,
) -> Option<SplitDecision> {
    assert_eq!(
        feature_values.len(),
        targets.len(),
        "feature/target length mismatch"
    );
    let candidate = scan_feature(feature_values, targets, min_samples_leaf)?;
    let parent_sse = sorted_sse(targets);
    let (left, right) = route_targets(
        feature_values,
        targets,
        candidate.threshold,
        candidate.missing,
    );
    let gain = parent_sse - sorted_sse(&left) - sorted_sse(&right);
    if gain <= gain_epsilon(parent_sse) {
        return None;
    }
    Some(SplitDecision {
        feature: 0,
        threshold: candidate.threshold,
        missing: candidate.missing,
        gain,
    })
}

fn sample_features(d: usize, m: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    if m >= d {
        return (0..d).collect();
    }
    let mut pool: Vec<usize> = (0..d).collect();
    for i in 0..m {
        let j = rng.random_range(i..d);
        pool.swap(i, j);
    }
    let mut sampled = pool[..m].to_vec();
    sampled.sort_unstable();
    sampled
}

struct TreeBuilder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [f64],
    params: TreeParams,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: u32, rng: &mut impl rand::Rng) -> usize {
        if let Some(split) = self.find_split(&rows, depth, rng) {
            let (mut left_rows, mut right_rows) = (Vec::new(), Vec::new());
            for &r in &rows {
                if split.goes_left(self.x.get(r, split.feature)) {
                    left_rows.push(r);
                } else {
                    right_rows.push(r);
                }
            }
            let idx = self.nodes.len();
            self.nodes.push(Node::Leaf {
                value: 0.0,
                members: Vec::new(),
            });
            let left = self.grow(left_rows, depth + 1, rng);
            let right = self.grow(right_rows, depth + 1, rng);
            self.nodes[idx] = Node::Split { split, left, right };
            idx
        } else {
            let targets: Vec<f64> = rows.iter().map(|&r| self.y[r]).collect();
            let idx = self.nodes.len();
            self.nodes.push(Node::Leaf {
                value: sorted_mean(&targets),
                members: rows.iter().map(|&r| r as u32).collect(),
            });
            idx
        }
    }

    fn find_split(
        &self,
        rows: &[usize],
        depth: u32,
        rng: &mut impl rand::Rng,
    ) -> Option<SplitDecision> {
        if rows.len() < 2 {
            return None;
        }
        if let Some(max_depth) = self.params.max_depth {
            if depth >= max_depth {
                return None;
            }
        }
        let d = self.x.n_cols();
        let m = self.params.n_candidate_features.unwrap_or(d).clamp(1, d);
        let features = sample_features(d, m, rng);

        let targets: Vec<f64> = rows.iter().map(|&r| self.y[r]).collect();
        let mut best: Option<(usize, Candidate, f64)> = None;
        let mut values = Vec::with_capacity(rows.len());
        for &f in &features {
            values.clear();
            values.extend(rows.iter().map(|&r| self.x.get(r, f)));
            if let Some(candidate) = scan_feature(&values, &targets, self.params.min_samples_leaf) {
                // Candidates compare across features by the order-canonical
                // two-pass SSE: the same row partition reachable through two
                // different features then compares exactly equal and the
                // lowest feature index wins, as the scan-time prefix sums
                // cannot guarantee.
                let (left, right) =
                    route_targets(&values, &targets, candidate.threshold, candidate.missing);
                let stable_sse = sorted_sse(&left) + sorted_sse(&right);
                if best.as_ref().is_none_or(|&(_, _, b)| stable_sse < b) {
                    best = Some((f, candidate, stable_sse));
                }
            }
        }
        let (feature, candidate, children_sse) = best?;

        let parent_sse = sorted_sse(&targets);
        let gain = parent_sse - children_sse;
        if gain <= gain_epsilon(parent_sse) {
            return None;
        }
        Some(SplitDecision {
            feature,
            threshold: candidate.threshold,
            missing: candidate.missing,
            gain,
        })
    }
}

/// Fits a tree on the rows of `(x, y)` listed in `rows`.
///
/// `rows` may repeat indices (bootstrap multisets); leaf members preserve the
/// multiplicity. Feature sampling uses a generator derived from
/// `sampler_seed`, so the fit is a pure function of its arguments.
pub fn fit_tree(
    x: &FeatureMatrix,
    y: &[f64],
    rows: &[usize],
    params: &TreeParams,
    sampler_seed: u64,
) -> Result<TreeModel> {
    if rows.is_empty() || x.n_rows() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if y.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.n_rows(),
        });
    }
    let mut rng = stream_rng(sampler_seed, 0);
    let mut builder = TreeBuilder {
        x,
        y,
        params: *params,
        nodes: Vec::new(),
    };
    builder.grow(rows.to_vec(), 0, &mut rng);
    Ok(TreeModel {
        nodes: builder.nodes,
        n_features: x.n_cols(),
        params: *params,
    })
}

impl TreeModel {
    /// Routes a feature row to its leaf; returns `(leaf id, leaf mean)`.
    pub fn predict(&self, row: &[f64]) -> Result<(usize, f64)> {
        if row.len() != self.n_features {
            return Err(Error::FeatureArity {
                found: row.len(),
                expected: self.n_features,
            });
        }
        Ok(self.predict_unchecked(row))
    }

    pub(crate) fn predict_unchecked(&self, row: &[f64]) -> (usize, f64) {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Split { split, left, right } => {
                    idx = if split.goes_left(row[split.feature]) {
                        *left
                    } else {
                        *right
                    };
                }
                Node::Leaf { value, .. } => return (idx, *value),
            }
        }
    }

    /// Leaf node ids in arena order.
    pub fn leaf_ids(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n, Node::Leaf { .. }))
            .map(|(i, _)| i)
            .collect()
    }

    /// Members of a leaf node. Panics if `id` is not a leaf.
    pub fn leaf_members(&self, id: usize) -> &[u32] {
        match &self.nodes[id] {
            Node::Leaf { members, .. } => members,
            Node::Split { .. } => panic!("node {id} is not a leaf"),
        }
    }

    /// Number of internal nodes splitting on each feature.
    pub fn split_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.n_features];
        for node in &self.nodes {
            if let Node::Split { split, .. } = node {
                counts[split.feature] += 1;
            }
        }
        counts
    }
}
