//! Silhouette score and adjusted Rand index.

use crate::exec::map_indexed;
use crate::tabular::FeatureMatrix;

/// Mean silhouette over all rows, Euclidean distance.
///
/// For row i with mean intra-cluster distance a (self excluded) and minimal
/// mean distance to another cluster b, the silhouette is (b - a) / max(a, b).
/// Rows alone in their cluster score 0.
pub fn mean_silhouette(x: &FeatureMatrix, assignments: &[usize], k: usize) -> f64 {
    let n = x.n_rows();
    assert_eq!(assignments.len(), n, "assignment length mismatch");
    if n == 0 {
        return 0.0;
    }
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }

    let scores = map_indexed(n, |i| {
        let mut sums = vec![0.0f64; k];
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut d2 = 0.0;
            for (a, b) in x.row(i).iter().zip(x.row(j)) {
                d2 += (a - b) * (a - b);
            }
            sums[assignments[j]] += d2.sqrt();
        }
        let own = assignments[i];
        if sizes[own] <= 1 {
            return 0.0;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let mut b = f64::INFINITY;
        for c in 0..k {
            if c != own && sizes[c] > 0 {
                b = b.min(sums[c] / sizes[c] as f64);
            }
        }
        if !b.is_finite() {
            return 0.0;
        }
        let denom = a.max(b);
        if denom == 0.0 {
            0.0
        } else {
            (b - a) / denom
        }
    });
    scores.iter().sum::<f64>() / n as f64
}

/// Adjusted Rand index between two labelings of the same rows.
///
/// 1 for identical partitions (up to label permutation), approximately 0 for
/// independent ones.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labeling length mismatch");
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let ka = a.iter().max().map_or(0, |&m| m + 1);
    let kb = b.iter().max().map_or(0, |&m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let choose2 = |v: u64| (v * v.saturating_sub(1)) as f64 / 2.0;
    let mut sum_cells = 0.0;
    let mut row_sums = vec![0u64; ka];
    let mut col_sums = vec![0u64; kb];
    for (i, row) in table.iter().enumerate() {
        for (j, &cell) in row.iter().enumerate() {
            sum_cells += choose2(cell);
            row_sums[i] += cell;
            col_sums[j] += cell;
        }
    }
    let sum_rows: f64 = row_sums.iter().map(|&v| choose2(v)).sum();
    let sum_cols: f64 = col_sums.iter().map(|&v| choose2(v)).sum();
    let total = choose2(n as u64);
    let expected = sum_rows * sum_cols / total;
    let max_index = (sum_rows + sum_cols) / 2.0;
    if (max_index - expected).abs() < 1e-15 {
        return 1.0; // both partitions trivial
    }
    (sum_cells - expected) / (max_index - expected)
}
