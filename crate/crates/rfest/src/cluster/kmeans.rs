//! k-means++ seeding, Lloyd iterations and cluster-count diagnostics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::seeding::{derive_seed, stream_rng};
use crate::tabular::FeatureMatrix;

use super::silhouette::mean_silhouette;

/// Restarts per k used by [`choose_k`].
const RESTARTS: usize = 10;
/// Mean silhouette below this flags "no cluster structure".
pub(crate) const SILHOUETTE_STRUCTURE_THRESHOLD: f64 = 0.4;

/// A fitted k-means partition in the standardized feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub k: usize,
    /// k centroids of dimension d.
    pub centroids: Vec<Vec<f64>>,
    /// Row -> cluster, each row assigned to its nearest centroid.
    pub assignments: Vec<usize>,
    /// Total squared distance of rows to their assigned centroid.
    pub inertia: f64,
    pub seed: u64,
    pub iterations: usize,
    /// Inertia after each assignment phase, non-increasing.
    pub inertia_trace: Vec<f64>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid of a row; ties break to the lowest centroid index.
fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(row, centroid);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    (best, best_d)
}

/// k-means++ seeding: first center uniform, later centers drawn with
/// probability proportional to the squared distance to the nearest chosen.
fn seed_centroids(x: &FeatureMatrix, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = x.n_rows();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(x.row(rng.random_range(0..n)).to_vec());
    let mut dist2: Vec<f64> = (0..n)
        .map(|r| squared_distance(x.row(r), &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = dist2.iter().sum();
        let next = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (r, &d) in dist2.iter().enumerate() {
                u -= d;
                if u <= 0.0 {
                    chosen = r;
                    break;
                }
            }
            chosen
        } else {
            // all remaining points coincide with a center
            rng.random_range(0..n)
        };
        let centroid = x.row(next).to_vec();
        for (r, slot) in dist2.iter_mut().enumerate() {
            let d = squared_distance(x.row(r), &centroid);
            if d < *slot {
                *slot = d;
            }
        }
        centroids.push(centroid);
    }
    centroids
}

/// Lloyd iterations until assignments stabilize or `max_iter` is reached.
pub fn kmeans_fit(x: &FeatureMatrix, k: usize, seed: u64, max_iter: usize) -> Result<KMeansModel> {
    let n = x.n_rows();
    let d = x.n_cols();
    if k < 1 || k > n {
        return Err(Error::ClusterCount { k, n });
    }
    x.require_complete(&[])?;

    let mut rng = stream_rng(seed, 0);
    let mut centroids = seed_centroids(x, k, &mut rng);
    let mut assignments: Vec<usize> = vec![usize::MAX; n];
    let mut inertia_trace = Vec::new();
    let mut iterations = 0;

    let inertia = loop {
        let assigned = map_indexed(n, |r| nearest(x.row(r), &centroids));
        let new_assignments: Vec<usize> = assigned.iter().map(|&(c, _)| c).collect();
        let inertia: f64 = assigned.iter().map(|&(_, d2)| d2).sum();
        inertia_trace.push(inertia);
        let stable = new_assignments == assignments;
        assignments = new_assignments;
        if stable || iterations >= max_iter {
            break inertia;
        }
        iterations += 1;

        // update step: centroid = mean of members
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (r, &c) in assignments.iter().enumerate() {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(x.row(r)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in &mut sums[c] {
                    *s /= counts[c] as f64;
                }
                centroids[c] = sums[c].clone();
            } else {
                // empty cluster: restart it at the row farthest from its
                // current centroid (lowest index on ties)
                let mut far_row = 0;
                let mut far_d = -1.0;
                for r in 0..n {
                    let dist = squared_distance(x.row(r), &centroids[assignments[r]]);
                    if dist > far_d {
                        far_d = dist;
                        far_row = r;
                    }
                }
                centroids[c] = x.row(far_row).to_vec();
            }
        }
    };

    Ok(KMeansModel {
        k,
        centroids,
        assignments,
        inertia,
        seed,
        iterations,
        inertia_trace,
    })
}

/// Diagnostics row for one candidate k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KDiagnostic {
    pub k: usize,
    /// Best inertia over the restarts.
    pub inertia: f64,
    /// Mean silhouette of the best-inertia model.
    pub mean_silhouette: f64,
}

/// Cluster-count diagnostics over k in [2, k_max].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDiagnostics {
    pub table: Vec<KDiagnostic>,
    /// k with the highest mean silhouette (lowest k on ties).
    pub selected_k: usize,
    /// False when even the best silhouette stays below the threshold,
    /// flagging "no cluster structure".
    pub has_structure: bool,
    pub silhouette_threshold: f64,
}

/// Fits every k in [2, k_max] with restarts and reports inertia + silhouette.
pub fn choose_k(
    x: &FeatureMatrix,
    k_max: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterDiagnostics> {
    let n = x.n_rows();
    if k_max < 2 || k_max + 1 > n {
        return Err(Error::ClusterCount { k: k_max, n });
    }
    let mut table = Vec::new();
    for k in 2..=k_max {
        let mut best: Option<KMeansModel> = None;
        for restart in 0..RESTARTS {
            let model = kmeans_fit(
                x,
                k,
                derive_seed(seed, (k * 1000 + restart) as u64),
                max_iter,
            )?;
            if best.as_ref().is_none_or(|b| model.inertia < b.inertia) {
                best = Some(model);
            }
        }
        let best = best.expect("at least one restart");
        let silhouette = mean_silhouette(x, &best.assignments, k);
        table.push(KDiagnostic {
            k,
            inertia: best.inertia,
            mean_silhouette: silhouette,
        });
    }
    let selected = table
        .iter()
        .max_by(|a, b| {
            a.mean_silhouette
                .total_cmp(&b.mean_silhouette)
                .then(b.k.cmp(&a.k))
        })
        .expect("non-empty table");
    Ok(ClusterDiagnostics {
        selected_k: selected.k,
        has_structure: selected.mean_silhouette >= SILHOUETTE_STRUCTURE_THRESHOLD,
        silhouette_threshold: SILHOUETTE_STRUCTURE_THRESHOLD,
        table,
    })
}
