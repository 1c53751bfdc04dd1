//! Exact (non-accelerated) t-SNE embedding into two dimensions.
//!
//! Per-point Gaussian bandwidths are found by binary search so that
//! 2^(entropy) of each conditional distribution matches the requested
//! perplexity to 1e-3 relative. The joint P matrix is the symmetrized,
//! normalized conditional matrix; the low-dimensional affinities Q use the
//! Student-t kernel. Optimization is gradient descent with momentum (0.5
//! during the early-exaggeration phase, 0.8 after) and x12 early exaggeration
//! over the first 20% of iterations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::seeding::stream_rng;
use crate::tabular::FeatureMatrix;

/// Probabilities below this floor are clipped for KL stability.
const PROB_FLOOR: f64 = 1e-12;
/// Relative tolerance of the perplexity calibration.
const PERPLEXITY_TOL: f64 = 1e-3;
const MAX_BISECTIONS: usize = 200;
const EXAGGERATION: f64 = 12.0;
/// Fraction of iterations under early exaggeration.
const EXAGGERATION_PHASE: f64 = 0.2;

/// Embedding hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsneParams {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TsneParams {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            seed: 0,
        }
    }
}

/// A fitted 2-D embedding with its optimization bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingResult {
    pub coords: Vec<[f64; 2]>,
    /// KL divergence of the final embedding against the true P.
    pub final_kl: f64,
    /// KL against the true P when early exaggeration switched off.
    pub exaggeration_end_kl: f64,
    /// Coordinates at the end of the exaggeration phase.
    pub exaggeration_end_coords: Vec<[f64; 2]>,
    pub perplexity: f64,
    pub seed: u64,
    pub iterations: usize,
}

fn pairwise_squared_distances(x: &FeatureMatrix) -> Vec<f64> {
    let n = x.n_rows();
    let rows = map_indexed(n, |i| {
        let mut row = vec![0.0; n];
        for (j, slot) in row.iter_mut().enumerate() {
            if i != j {
                let mut d2 = 0.0;
                for (a, b) in x.row(i).iter().zip(x.row(j)) {
                    d2 += (a - b) * (a - b);
                }
                *slot = d2;
            }
        }
        row
    });
    rows.into_iter().flatten().collect()
}

/// Conditional distributions P(j|i) with per-point bandwidth search.
///
/// Returns the row-stochastic n x n conditional matrix and the precision
/// beta_i = 1 / (2 sigma_i^2) of every point. Each row's 2^entropy matches
/// the perplexity within 1e-3 relative.
pub fn conditional_probabilities(
    x: &FeatureMatrix,
    perplexity: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.n_rows();
    if n < 5 {
        return Err(Error::TooFewRows {
            n,
            reason: "t-SNE needs at least 5 points".to_string(),
        });
    }
    // 2^entropy ranges over (1, n-1]: 1 as beta -> inf, n-1 at beta = 0.
    if !(perplexity > 1.0 && perplexity <= (n - 1) as f64) {
        return Err(Error::PerplexityInfeasible { perplexity, n });
    }
    let d2 = pairwise_squared_distances(x);

    let per_row: Vec<Result<(Vec<f64>, f64)>> = map_indexed(n, |i| {
        let mut beta = 1.0;
        let mut beta_min = f64::NEG_INFINITY;
        let mut beta_max = f64::INFINITY;
        let mut row = vec![0.0; n];
        for _ in 0..MAX_BISECTIONS {
            // p_{j|i} ∝ exp(-beta d_ij^2), shifted by the row minimum for
            // numerical range
            let mut min_d2 = f64::INFINITY;
            for j in 0..n {
                if j != i {
                    min_d2 = min_d2.min(d2[i * n + j]);
                }
            }
            let mut sum = 0.0;
            for j in 0..n {
                row[j] = if j == i {
                    0.0
                } else {
                    (-beta * (d2[i * n + j] - min_d2)).exp()
                };
                sum += row[j];
            }
            let mut entropy_bits = 0.0;
            for value in row.iter_mut() {
                *value /= sum;
                if *value > 0.0 {
                    entropy_bits -= *value * value.log2();
                }
            }
            let current = entropy_bits.exp2();
            if ((current - perplexity) / perplexity).abs() <= PERPLEXITY_TOL {
                return Ok((row, beta));
            }
            if current > perplexity {
                // too flat: sharpen
                beta_min = beta;
                beta = if beta_max.is_finite() {
                    (beta + beta_max) / 2.0
                } else {
                    beta * 2.0
                };
            } else {
                beta_max = beta;
                beta = if beta_min.is_finite() {
                    (beta + beta_min) / 2.0
                } else {
                    beta / 2.0
                };
            }
        }
        Err(Error::PerplexityNotConverged { point: i })
    });

    let mut conditional = vec![0.0; n * n];
    let mut betas = vec![0.0; n];
    for (i, entry) in per_row.into_iter().enumerate() {
        let (row, beta) = entry?;
        conditional[i * n..(i + 1) * n].copy_from_slice(&row);
        betas[i] = beta;
    }
    Ok((conditional, betas))
}

/// Symmetrized joint probabilities p_ij = (p_{j|i} + p_{i|j}) / (2n).
pub fn joint_probabilities(x: &FeatureMatrix, perplexity: f64) -> Result<Vec<f64>> {
    let (conditional, _) = conditional_probabilities(x, perplexity)?;
    let n = x.n_rows();
    let mut joint = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            joint[i * n + j] = (conditional[i * n + j] + conditional[j * n + i]) / (2.0 * n as f64);
        }
    }
    Ok(joint)
}

/// Student-t affinities of a 2-D embedding, normalized to sum to one.
pub fn student_t_affinities(coords: &[[f64; 2]]) -> Vec<f64> {
    let n = coords.len();
    let mut q = vec![0.0; n * n];
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let dx = coords[i][0] - coords[j][0];
                let dy = coords[i][1] - coords[j][1];
                let value = 1.0 / (1.0 + dx * dx + dy * dy);
                q[i * n + j] = value;
                sum += value;
            }
        }
    }
    for value in &mut q {
        *value /= sum;
    }
    q
}

fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&pi, &qi)| {
            if pi > 0.0 {
                pi * (pi / qi.max(PROB_FLOOR)).ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// Embeds the rows of `x` into two dimensions by exact t-SNE.
pub fn tsne_embed(x: &FeatureMatrix, params: &TsneParams) -> Result<EmbeddingResult> {
    let n = x.n_rows();
    x.require_complete(&[])?;
    if params.iterations < 2 {
        return Err(Error::InvalidScenario(
            "t-SNE needs at least 2 iterations".to_string(),
        ));
    }
    let p = joint_probabilities(x, params.perplexity)?;
    let exaggeration_iters = ((params.iterations as f64 * EXAGGERATION_PHASE).round() as usize)
        .clamp(1, params.iterations - 1);

    let mut rng = stream_rng(params.seed, 0);
    let mut coords: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            [
                (rng.random::<f64>() - 0.5) * 2e-4,
                (rng.random::<f64>() - 0.5) * 2e-4,
            ]
        })
        .collect();
    let mut velocity = vec![[0.0f64; 2]; n];
    let mut exaggeration_end_kl = f64::INFINITY;
    let mut exaggeration_end_coords = coords.clone();

    for iteration in 0..params.iterations {
        let exaggerating = iteration < exaggeration_iters;
        let p_scale = if exaggerating { EXAGGERATION } else { 1.0 };
        let momentum = if exaggerating { 0.5 } else { 0.8 };

        let q_unnorm: Vec<f64> = {
            let coords = &coords;
            map_indexed(n, |i| {
                let mut row = vec![0.0; n];
                for (j, slot) in row.iter_mut().enumerate() {
                    if i != j {
                        let dx = coords[i][0] - coords[j][0];
                        let dy = coords[i][1] - coords[j][1];
                        *slot = 1.0 / (1.0 + dx * dx + dy * dy);
                    }
                }
                row
            })
            .into_iter()
            .flatten()
            .collect()
        };
        let q_sum: f64 = q_unnorm.iter().sum();

        let gradient: Vec<[f64; 2]> = {
            let coords = &coords;
            let p = &p;
            let q_unnorm = &q_unnorm;
            map_indexed(n, |i| {
                let mut g = [0.0f64; 2];
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let q_ij = (q_unnorm[i * n + j] / q_sum).max(PROB_FLOOR);
                    let factor = 4.0 * (p_scale * p[i * n + j] - q_ij) * q_unnorm[i * n + j];
                    g[0] += factor * (coords[i][0] - coords[j][0]);
                    g[1] += factor * (coords[i][1] - coords[j][1]);
                }
                g
            })
        };

        for (g, c) in gradient.iter().zip(&coords) {
            if !(g[0].is_finite() && g[1].is_finite() && c[0].is_finite() && c[1].is_finite()) {
                return Err(Error::NonFiniteEmbedding {
                    what: "gradient".to_string(),
                    iteration,
                });
            }
        }

        for i in 0..n {
            for dim in 0..2 {
                velocity[i][dim] =
                    momentum * velocity[i][dim] - params.learning_rate * gradient[i][dim];
                coords[i][dim] += velocity[i][dim];
            }
        }
        // keep the embedding centered
        let mut mean = [0.0f64; 2];
        for c in &coords {
            mean[0] += c[0];
            mean[1] += c[1];
        }
        mean[0] /= n as f64;
        mean[1] /= n as f64;
        for c in &mut coords {
            c[0] -= mean[0];
            c[1] -= mean[1];
        }

        if iteration + 1 == exaggeration_iters {
            let q = student_t_affinities(&coords);
            exaggeration_end_kl = kl_divergence(&p, &q);
            exaggeration_end_coords = coords.clone();
        }
    }

    let q = student_t_affinities(&coords);
    let final_kl = kl_divergence(&p, &q);
    if !final_kl.is_finite() {
        return Err(Error::NonFiniteEmbedding {
            what: "KL divergence".to_string(),
            iteration: params.iterations,
        });
    }

    Ok(EmbeddingResult {
        coords,
        final_kl,
        exaggeration_end_kl,
        exaggeration_end_coords,
        perplexity: params.perplexity,
        seed: params.seed,
        iterations: params.iterations,
    })
}
