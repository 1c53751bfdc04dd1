//! Shared test support: an exhaustive-search regression-tree oracle,
//! independent of the production implementation.
//!
//! The oracle enumerates every (feature, midpoint threshold, missing
//! direction) candidate at every node with plain two-pass arithmetic and the
//! same documented tie-breaking (max gain, lowest feature, lowest threshold,
//! missing left). It exists to cross-check `rfest::tree` on small instances.

use rfest::tabular::FeatureMatrix;

#[derive(Debug, Clone)]
pub enum OracleNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        missing_left: bool,
        left: Box<OracleNode>,
        right: Box<OracleNode>,
    },
}

fn mean(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().sum::<f64>() / sorted.len() as f64
}

fn sse(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let mut devs: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    devs.sort_by(f64::total_cmp);
    devs.iter().sum()
}

struct BestCandidate {
    feature: usize,
    threshold: f64,
    missing_left: bool,
    children_sse: f64,
}

pub fn fit_oracle_tree(
    x: &FeatureMatrix,
    y: &[f64],
    rows: &[usize],
    max_depth: u32,
    min_samples_leaf: usize,
) -> OracleNode {
    grow(x, y, rows, 0, max_depth, min_samples_leaf.max(1))
}

fn grow(
    x: &FeatureMatrix,
    y: &[f64],
    rows: &[usize],
    depth: u32,
    max_depth: u32,
    min_leaf: usize,
) -> OracleNode {
    let targets: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
    let leaf = OracleNode::Leaf {
        value: mean(&targets),
    };
    if depth >= max_depth || rows.len() < 2 {
        return leaf;
    }

    let parent_sse = sse(&targets);
    let mut best: Option<BestCandidate> = None;
    for feature in 0..x.n_cols() {
        // candidate thresholds: midpoints of consecutive distinct observed values
        let mut observed: Vec<f64> = rows
            .iter()
            .map(|&r| x.get(r, feature))
            .filter(|v| !v.is_nan())
            .collect();
        observed.sort_by(f64::total_cmp);
        observed.dedup();
        let has_missing = rows.iter().any(|&r| x.get(r, feature).is_nan());
        for pair in observed.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            if threshold <= pair[0] {
                continue;
            }
            let directions: &[bool] = if has_missing { &[true, false] } else { &[true] };
            for &missing_left in directions {
                let mut left = Vec::new();
                let mut right = Vec::new();
                for &r in rows {
                    let v = x.get(r, feature);
                    let goes_left = if v.is_nan() {
                        missing_left
                    } else {
                        v < threshold
                    };
                    if goes_left {
                        left.push(y[r]);
                    } else {
                        right.push(y[r]);
                    }
                }
                if left.len() < min_leaf || right.len() < min_leaf {
                    continue;
                }
                let children_sse = sse(&left) + sse(&right);
                if best.as_ref().is_none_or(|b| children_sse < b.children_sse) {
                    best = Some(BestCandidate {
                        feature,
                        threshold,
                        missing_left,
                        children_sse,
                    });
                }
            }
        }
    }

    let Some(best) = best else { return leaf };
    let gain = parent_sse - best.children_sse;
    if gain <= 1e-12 * parent_sse.max(1.0) {
        return leaf;
    }

    let mut left_rows = Vec::new();
    let mut right_rows = Vec::new();
    for &r in rows {
        let v = x.get(r, best.feature);
        let goes_left = if v.is_nan() {
            best.missing_left
        } else {
            v < best.threshold
        };
        if goes_left {
            left_rows.push(r);
        } else {
            right_rows.push(r);
        }
    }
    OracleNode::Split {
        feature: best.feature,
        threshold: best.threshold,
        missing_left: best.missing_left,
        left: Box::new(grow(x, y, &left_rows, depth + 1, max_depth, min_leaf)),
        right: Box::new(grow(x, y, &right_rows, depth + 1, max_depth, min_leaf)),
    }
}

pub fn oracle_predict(node: &OracleNode, row: &[f64]) -> f64 {
    match node {
        OracleNode::Leaf { value } => *value,
        OracleNode::Split {
            feature,
            threshold,
            missing_left,
            left,
            right,
        } => {
            let v = row[*feature];
            let goes_left = if v.is_nan() {
                *missing_left
            } else {
                v < *threshold
            };
            if goes_left {
                oracle_predict(left, row)
            } else {
                oracle_predict(right, row)
            }
        }
    }
}
