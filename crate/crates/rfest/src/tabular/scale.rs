//! Z-score standardization with median imputation.
//!
//! Statistics (mean, population standard deviation, median) come from the
//! non-missing cells of each column; missing cells are imputed with the
//! median before scaling, so standardized columns are complete. Needed by
//! clustering, which requires complete vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{median, sorted_mean, sorted_sse};

use super::dataset::{Cell, Dataset};
use super::schema::ColumnKind;

/// Per-column scaling parameters; enough to invert the transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub column: String,
    pub mean: f64,
    /// Population (1/n) standard deviation of the observed cells.
    pub stddev: f64,
    /// Median of the observed cells, used for imputation.
    pub median: f64,
}

impl ColumnScale {
    pub fn forward(&self, value: f64) -> f64 {
        (value - self.mean) / self.stddev
    }

    pub fn inverse(&self, scaled: f64) -> f64 {
        scaled * self.stddev + self.mean
    }
}

/// Standardizes the named numeric columns of `ds`.
///
/// Each column needs at least two observed values with nonzero spread
/// (detected exactly as max > min). Returns the transformed dataset and the
/// per-column parameters.
pub fn standardize(ds: &Dataset, columns: &[String]) -> Result<(Dataset, Vec<ColumnScale>)> {
    let mut out = ds.clone();
    let mut scales = Vec::with_capacity(columns.len());
    for name in columns {
        let idx = ds.column_index(name)?;
        if ds.schema().columns[idx].kind != ColumnKind::Numeric {
            return Err(Error::ColumnKindMismatch {
                column: name.clone(),
                expected: "numeric".to_string(),
            });
        }
        let observed: Vec<f64> = ds
            .rows()
            .iter()
            .filter_map(|row| row[idx].as_number())
            .collect();
        if observed.len() < 2 {
            return Err(Error::ColumnUnusable {
                column: name.clone(),
                reason: format!("{} observed values, need at least 2", observed.len()),
            });
        }
        let max = observed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = observed.iter().cloned().fold(f64::INFINITY, f64::min);
        if max <= min {
            return Err(Error::ZeroVariance(name.clone()));
        }
        let mean = sorted_mean(&observed);
        let stddev = (sorted_sse(&observed) / observed.len() as f64).sqrt();
        let med = median(&observed);
        let scale = ColumnScale {
            column: name.clone(),
            mean,
            stddev,
            median: med,
        };

        let cells = out
            .rows()
            .iter()
            .map(|row| {
                let raw = row[idx].as_number().unwrap_or(med);
                Cell::Number(scale.forward(raw))
            })
            .collect();
        out = out.with_column_cells(name, ColumnKind::Numeric, cells)?;
        scales.push(scale);
    }
    Ok((out, scales))
}
