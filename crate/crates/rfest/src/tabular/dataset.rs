//! Dataset rows, cells and the numeric feature matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::schema::{ColumnKind, ColumnRole, Schema};

/// One cell of a dataset: number, category label, or missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Number(f64),
    Category(String),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_category(&self) -> Option<&str> {
        match self {
            Cell::Category(s) => Some(s),
            _ => None,
        }
    }
}

/// Immutable columnar table with schema and explicit missing cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: Schema,
    rows: Vec<Vec<Cell>>,
}

impl Dataset {
    /// Builds a dataset, validating row arity, cell kinds against the schema,
    /// and the [0, 100] range of non-missing targets.
    pub fn new(schema: Schema, rows: Vec<Vec<Cell>>) -> Result<Self> {
        let target_idx = schema.target_index();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::RowArity {
                    row: r + 1,
                    found: row.len(),
                    expected: schema.len(),
                });
            }
            for (c, cell) in row.iter().enumerate() {
                let col = &schema.columns[c];
                match (col.kind, cell) {
                    (_, Cell::Missing) => {}
                    (ColumnKind::Numeric, Cell::Number(v)) => {
                        if !v.is_finite() {
                            return Err(Error::ParseCell {
                                row: r + 1,
                                column: col.name.clone(),
                                value: v.to_string(),
                            });
                        }
                    }
                    (ColumnKind::Categorical, Cell::Category(_)) => {}
                    (kind, cell) => {
                        return Err(Error::Schema(format!(
                            "row {}, column {:?}: cell {:?} does not match column kind {:?}",
                            r + 1,
                            col.name,
                            cell,
                            kind
                        )))
                    }
                }
            }
            if let Some(t) = target_idx {
                if let Cell::Number(v) = row[t] {
                    if !(0.0..=100.0).contains(&v) {
                        return Err(Error::TargetOutOfRange {
                            row: r + 1,
                            value: v,
                        });
                    }
                }
            }
        }
        Ok(Self { schema, rows })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.rows[row][col]
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.schema.column_index(name)
    }

    /// Numeric value of a named cell, `None` when missing.
    pub fn number(&self, row: usize, column: &str) -> Result<Option<f64>> {
        let idx = self.column_index(column)?;
        Ok(self.rows[row][idx].as_number())
    }

    /// Target value of a row in percent, `None` when missing or no target column.
    pub fn target(&self, row: usize) -> Option<f64> {
        let t = self.schema.target_index()?;
        self.rows[row][t].as_number()
    }

    /// Targets of all rows; missing targets are `None`.
    pub fn targets(&self) -> Vec<Option<f64>> {
        (0..self.n_rows()).map(|r| self.target(r)).collect()
    }

    /// Fraction of missing cells in one column.
    pub fn missing_fraction(&self, column: &str) -> Result<f64> {
        let idx = self.column_index(column)?;
        if self.rows.is_empty() {
            return Ok(0.0);
        }
        let missing = self.rows.iter().filter(|r| r[idx].is_missing()).count();
        Ok(missing as f64 / self.rows.len() as f64)
    }

    /// Number of missing cells a row has among feature columns.
    pub fn missing_in_features(&self, row: usize) -> usize {
        self.schema
            .columns
            .iter()
            .enumerate()
            .filter(|(c, col)| col.role == ColumnRole::Feature && self.rows[row][*c].is_missing())
            .count()
    }

    /// New dataset with only the selected rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
        }
    }

    /// Row indices with at most `limit` missing feature cells.
    pub fn rows_with_at_most_missing(&self, limit: usize) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&r| self.missing_in_features(r) <= limit)
            .collect()
    }

    /// Appends a numeric feature column; `values[i] = None` means missing.
    pub fn append_numeric_column(
        &self,
        name: &str,
        unit: &str,
        values: &[Option<f64>],
    ) -> Result<Dataset> {
        if values.len() != self.n_rows() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: self.n_rows(),
            });
        }
        let mut columns = self.schema.columns.clone();
        columns.push(
            super::schema::ColumnSchema::new(name, ColumnKind::Numeric, ColumnRole::Feature)
                .with_unit(unit),
        );
        let schema = Schema::new(columns)?;
        let rows = self
            .rows
            .iter()
            .zip(values)
            .map(|(row, v)| {
                let mut row = row.clone();
                row.push(match v {
                    Some(x) => Cell::Number(*x),
                    None => Cell::Missing,
                });
                row
            })
            .collect();
        Dataset::new(schema, rows)
    }

    /// Replaces a column's cells in place (same kind checks as construction).
    pub(crate) fn with_column_cells(
        &self,
        column: &str,
        kind: ColumnKind,
        cells: Vec<Cell>,
    ) -> Result<Dataset> {
        let idx = self.column_index(column)?;
        let mut schema = self.schema.clone();
        schema.columns[idx].kind = kind;
        let rows = self
            .rows
            .iter()
            .zip(cells)
            .map(|(row, cell)| {
                let mut row = row.clone();
                row[idx] = cell;
                row
            })
            .collect();
        Dataset::new(schema, rows)
    }

    /// Keeps rows whose `column` value is >= `threshold` and whose target is
    /// present. Used for the depletion filter of the pre-production workflow.
    pub fn filter_rows(&self, column: &str, threshold: f64) -> Result<Dataset> {
        let idx = self.column_index(column)?;
        if self.schema.columns[idx].kind != ColumnKind::Numeric {
            return Err(Error::ColumnKindMismatch {
                column: column.to_string(),
                expected: "numeric".to_string(),
            });
        }
        let keep: Vec<usize> = (0..self.n_rows())
            .filter(|&r| {
                let passes = matches!(self.rows[r][idx], Cell::Number(v) if v >= threshold);
                passes && self.target(r).is_some()
            })
            .collect();
        Ok(self.select_rows(&keep))
    }

    /// Assembles the numeric feature matrix for the named columns.
    ///
    /// Missing cells become NaN (the trees route them by learned direction).
    /// Categorical columns are rejected: they must be target-encoded first.
    pub fn feature_matrix(&self, columns: &[String]) -> Result<FeatureMatrix> {
        let mut idxs = Vec::with_capacity(columns.len());
        for name in columns {
            let idx = self.column_index(name)?;
            if self.schema.columns[idx].kind != ColumnKind::Numeric {
                return Err(Error::ColumnUnusable {
                    column: name.clone(),
                    reason: "categorical column must be target-encoded before matrix assembly"
                        .to_string(),
                });
            }
            idxs.push(idx);
        }
        let mut values = Vec::with_capacity(self.n_rows() * idxs.len());
        for row in &self.rows {
            for &c in &idxs {
                values.push(row[c].as_number().unwrap_or(f64::NAN));
            }
        }
        Ok(FeatureMatrix::new(values, self.n_rows(), idxs.len()))
    }
}

/// Dense row-major numeric matrix; NaN encodes a missing value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl FeatureMatrix {
    pub fn new(values: Vec<f64>, n_rows: usize, n_cols: usize) -> Self {
        assert_eq!(values.len(), n_rows * n_cols, "matrix shape mismatch");
        Self {
            values,
            n_rows,
            n_cols,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            assert_eq!(row.len(), n_cols, "ragged rows");
            values.extend(row);
        }
        Self::new(values, n_rows, n_cols)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    /// New matrix with the selected rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        FeatureMatrix::new(values, rows.len(), self.n_cols)
    }

    /// Errors if any cell is NaN; complete matrices are required by clustering.
    pub fn require_complete(&self, column_names: &[String]) -> Result<()> {
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                if self.get(r, c).is_nan() {
                    let column = column_names
                        .get(c)
                        .cloned()
                        .unwrap_or_else(|| format!("#{c}"));
                    return Err(Error::IncompleteRow { row: r, column });
                }
            }
        }
        Ok(())
    }
}
