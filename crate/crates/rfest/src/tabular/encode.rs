//! Target encoding of categorical features.
//!
//! Each category is replaced by the mean recovery factor observed for it in
//! the training rows; unseen categories fall back to the global training
//! mean and missing categories stay missing (the trees route them). Inside
//! cross-validation the encoder is fitted on training folds only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::sorted_mean;

use super::dataset::{Cell, Dataset};
use super::schema::ColumnKind;

/// Category -> mean-target map for one column, with a global-mean fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEncoder {
    pub column: String,
    pub means: BTreeMap<String, f64>,
    pub fallback: f64,
}

/// Fits an encoder on the training data.
///
/// Rows contribute when both the category and the target are present. The
/// fallback is the mean target over all contributing rows.
pub fn fit_target_encoder(train: &Dataset, column: &str) -> Result<TargetEncoder> {
    let idx = train.column_index(column)?;
    if train.schema().columns[idx].kind != ColumnKind::Categorical {
        return Err(Error::ColumnKindMismatch {
            column: column.to_string(),
            expected: "categorical".to_string(),
        });
    }

    let mut per_category: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut all_targets = Vec::new();
    for row in 0..train.n_rows() {
        let (Some(category), Some(target)) =
            (train.cell(row, idx).as_category(), train.target(row))
        else {
            continue;
        };
        per_category
            .entry(category.to_string())
            .or_default()
            .push(target);
        all_targets.push(target);
    }
    if all_targets.is_empty() {
        return Err(Error::ColumnUnusable {
            column: column.to_string(),
            reason: "no rows with both category and target present".to_string(),
        });
    }

    let means = per_category
        .into_iter()
        .map(|(category, targets)| (category, sorted_mean(&targets)))
        .collect();
    Ok(TargetEncoder {
        column: column.to_string(),
        means,
        fallback: sorted_mean(&all_targets),
    })
}

/// Replaces the encoder's column with its numeric encoding.
///
/// Seen category -> stored mean; unseen -> fallback; missing stays missing.
pub fn apply_target_encoder(ds: &Dataset, encoder: &TargetEncoder) -> Result<Dataset> {
    let idx = ds.column_index(&encoder.column)?;
    let cells = ds
        .rows()
        .iter()
        .map(|row| match &row[idx] {
            Cell::Category(label) => Cell::Number(
                encoder
                    .means
                    .get(label)
                    .copied()
                    .unwrap_or(encoder.fallback),
            ),
            Cell::Number(v) => Cell::Number(*v),
            Cell::Missing => Cell::Missing,
        })
        .collect();
    ds.with_column_cells(&encoder.column, ColumnKind::Numeric, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::schema::{ColumnRole, ColumnSchema, Schema};

    fn dataset(rows: &[(Option<&str>, Option<f64>)]) -> Dataset {
        let schema = Schema::new(vec![
            ColumnSchema::new("lith", ColumnKind::Categorical, ColumnRole::Feature),
            ColumnSchema::new("rf", ColumnKind::Numeric, ColumnRole::Target),
        ])
        .unwrap();
        let rows = rows
            .iter()
            .map(|(cat, rf)| {
                vec![
                    cat.map_or(Cell::Missing, |s| Cell::Category(s.to_string())),
                    rf.map_or(Cell::Missing, Cell::Number),
                ]
            })
            .collect();
        Dataset::new(schema, rows).unwrap()
    }

    #[test]
    fn per_category_means_and_fallback() {
        // direct averaging oracle: A -> (10+20)/2 = 15, B -> 30, fallback mean(10,20,30) = 20
        let ds = dataset(&[
            (Some("A"), Some(10.0)),
            (Some("A"), Some(20.0)),
            (Some("B"), Some(30.0)),
        ]);
        let enc = fit_target_encoder(&ds, "lith").unwrap();
        assert_eq!(enc.means["A"], 15.0);
        assert_eq!(enc.means["B"], 30.0);
        assert_eq!(enc.fallback, 20.0);
    }

    #[test]
    fn single_category_is_identity() {
        let ds = dataset(&[(Some("A"), Some(40.0))]);
        let enc = fit_target_encoder(&ds, "lith").unwrap();
        assert_eq!(enc.means["A"], 40.0);
        assert_eq!(enc.fallback, 40.0);
    }

    #[test]
    fn constant_targets_map_everywhere() {
        let ds = dataset(&[
            (Some("A"), Some(25.0)),
            (Some("B"), Some(25.0)),
            (Some("C"), Some(25.0)),
        ]);
        let enc = fit_target_encoder(&ds, "lith").unwrap();
        assert!(enc.means.values().all(|&m| m == 25.0));
    }

    #[test]
    fn fit_is_order_independent() {
        let ds = dataset(&[
            (Some("A"), Some(10.111)),
            (Some("B"), Some(30.3)),
            (Some("A"), Some(20.07)),
            (Some("B"), Some(4.9)),
            (Some("A"), Some(0.555)),
        ]);
        let permuted = ds.select_rows(&[4, 2, 0, 3, 1]);
        let a = fit_target_encoder(&ds, "lith").unwrap();
        let b = fit_target_encoder(&permuted, "lith").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stored_means_lie_within_target_range() {
        let ds = dataset(&[
            (Some("A"), Some(10.0)),
            (Some("A"), Some(20.0)),
            (Some("B"), Some(30.0)),
            (Some("B"), Some(90.0)),
        ]);
        let enc = fit_target_encoder(&ds, "lith").unwrap();
        assert!(enc.means["A"] >= 10.0 && enc.means["A"] <= 20.0);
        assert!(enc.means["B"] >= 30.0 && enc.means["B"] <= 90.0);
    }

    #[test]
    fn apply_looks_up_falls_back_and_preserves_missing() {
        let train = dataset(&[
            (Some("A"), Some(10.0)),
            (Some("A"), Some(20.0)),
            (Some("B"), Some(30.0)),
        ]);
        let enc = fit_target_encoder(&train, "lith").unwrap();
        let test = dataset(&[
            (Some("A"), None),
            (Some("C"), None), // unseen -> fallback 20
            (None, None),      // missing stays missing
        ]);
        let encoded = apply_target_encoder(&test, &enc).unwrap();
        assert_eq!(encoded.number(0, "lith").unwrap(), Some(15.0));
        assert_eq!(encoded.number(1, "lith").unwrap(), Some(20.0));
        assert_eq!(encoded.number(2, "lith").unwrap(), None);
        assert_eq!(
            encoded.schema().column("lith").unwrap().kind,
            ColumnKind::Numeric
        );
    }

    #[test]
    fn rejects_numeric_column_and_empty_train() {
        let ds = dataset(&[(Some("A"), Some(10.0))]);
        assert!(fit_target_encoder(&ds, "rf").is_err());
        let no_targets = dataset(&[(Some("A"), None)]);
        assert!(fit_target_encoder(&no_targets, "lith").is_err());
    }
}
