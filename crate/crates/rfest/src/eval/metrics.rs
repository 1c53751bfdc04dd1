//! Point and interval metrics: MAE, R², coverage rate and mean width.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A prediction interval at one confidence level, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
}

impl PredictionInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Closed-bounds membership test.
    pub fn contains(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }

    /// Intersection with [0, 100], the reporting convention for percent
    /// targets. Infinite bounds collapse to the range ends.
    pub fn clamped(&self) -> PredictionInterval {
        let lower = self.lower.clamp(0.0, 100.0);
        let upper = self.upper.clamp(lower, 100.0);
        PredictionInterval {
            lower,
            upper,
            alpha: self.alpha,
        }
    }
}

/// Coverage and efficiency of the intervals at one confidence level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaMetrics {
    pub alpha: f64,
    pub coverage: f64,
    pub mean_width: f64,
}

fn check_pair(y: &[f64], y_hat: &[f64]) -> Result<()> {
    if y.len() != y_hat.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: y_hat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyMetricInput);
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_pair(y, y_hat)?;
    let sum: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).abs()).sum();
    Ok(sum / y.len() as f64)
}

/// Coefficient of determination, 1 - SS_res / SS_tot.
///
/// Errors on constant targets: a silent sentinel would corrupt aggregate
/// tables downstream.
pub fn r2(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_pair(y, y_hat)?;
    if y.len() < 2 {
        return Err(Error::TooFewRows {
            n: y.len(),
            reason: "R^2 needs at least 2 observations".to_string(),
        });
    }
    let mean: f64 = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ConstantTarget);
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Fraction of targets falling inside their interval (closed bounds).
pub fn coverage(intervals: &[PredictionInterval], y: &[f64]) -> Result<f64> {
    if intervals.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: intervals.len(),
            right: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyMetricInput);
    }
    let hits = intervals
        .iter()
        .zip(y)
        .filter(|(interval, &value)| interval.contains(value))
        .count();
    Ok(hits as f64 / y.len() as f64)
}

/// Average interval width.
pub fn mean_width(intervals: &[PredictionInterval]) -> Result<f64> {
    if intervals.is_empty() {
        return Err(Error::EmptyMetricInput);
    }
    let sum: f64 = intervals.iter().map(PredictionInterval::width).sum();
    Ok(sum / intervals.len() as f64)
}
