//! CSV ingestion and emission.
//!
//! UTF-8, comma-delimited, one header row that must match the schema column
//! names in order. Cells equal to a missing marker (default: empty string and
//! "NA", case-sensitive) load as missing; numeric columns are parsed as f64.

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

use super::dataset::{Cell, Dataset};
use super::schema::{ColumnKind, Schema};

/// Set of cell spellings treated as missing. Case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MissingMarkers(BTreeSet<String>);

impl Default for MissingMarkers {
    fn default() -> Self {
        Self(BTreeSet::from(["".to_string(), "NA".to_string()]))
    }
}

impl MissingMarkers {
    pub fn new<I: IntoIterator<Item = String>>(markers: I) -> Self {
        Self(markers.into_iter().collect())
    }

    pub fn matches(&self, cell: &str) -> bool {
        self.0.contains(cell)
    }

    /// Marker used when writing missing cells (the lexicographically first,
    /// i.e. the empty string for the default set).
    fn write_marker(&self) -> &str {
        self.0.iter().next().map(String::as_str).unwrap_or("")
    }
}

/// Loads a dataset from `path` against the declared schema.
pub fn load_csv(path: &Path, schema: &Schema, markers: &MissingMarkers) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;

    let headers = reader.headers()?.clone();
    if headers.len() != schema.len() {
        return Err(Error::Schema(format!(
            "header has {} columns, schema has {}",
            headers.len(),
            schema.len()
        )));
    }
    for (i, col) in schema.columns.iter().enumerate() {
        if headers.get(i) != Some(col.name.as_str()) {
            return Err(Error::HeaderMismatch {
                position: i,
                expected: col.name.clone(),
                found: headers.get(i).unwrap_or("").to_string(),
            });
        }
    }

    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != schema.len() {
            return Err(Error::RowArity {
                row: r + 1,
                found: record.len(),
                expected: schema.len(),
            });
        }
        let mut row = Vec::with_capacity(schema.len());
        for (c, col) in schema.columns.iter().enumerate() {
            let raw = record.get(c).unwrap_or("");
            if markers.matches(raw) {
                row.push(Cell::Missing);
                continue;
            }
            match col.kind {
                ColumnKind::Numeric => {
                    let value: f64 = raw.parse().map_err(|_| Error::ParseCell {
                        row: r + 1,
                        column: col.name.clone(),
                        value: raw.to_string(),
                    })?;
                    if !value.is_finite() {
                        return Err(Error::ParseCell {
                            row: r + 1,
                            column: col.name.clone(),
                            value: raw.to_string(),
                        });
                    }
                    row.push(Cell::Number(value));
                }
                ColumnKind::Categorical => row.push(Cell::Category(raw.to_string())),
            }
        }
        rows.push(row);
    }
    Dataset::new(schema.clone(), rows)
}

/// Writes a dataset to CSV so that `load_csv` reproduces it cell for cell.
///
/// Numbers use Rust's shortest round-trip formatting; missing cells use the
/// marker set's write marker.
pub fn write_csv(ds: &Dataset, path: &Path, markers: &MissingMarkers) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(ds.schema().columns.iter().map(|c| c.name.as_str()))?;
    for row in ds.rows() {
        let fields: Vec<String> = row
            .iter()
            .map(|cell| match cell {
                Cell::Number(v) => format!("{v}"),
                Cell::Category(s) => s.clone(),
                Cell::Missing => markers.write_marker().to_string(),
            })
            .collect();
        writer.write_record(&fields)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::schema::{ColumnRole, ColumnSchema};

    fn phi_rf_schema() -> Schema {
        Schema::new(vec![
            ColumnSchema::new("phi", ColumnKind::Numeric, ColumnRole::Feature),
            ColumnSchema::new("rf", ColumnKind::Numeric, ColumnRole::Target),
        ])
        .unwrap()
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_header_and_rows() {
        let f = write_tmp("phi,rf\n0.2,35\n");
        let ds = load_csv(f.path(), &phi_rf_schema(), &MissingMarkers::default()).unwrap();
        assert_eq!(ds.n_rows(), 1);
        assert_eq!(ds.number(0, "phi").unwrap(), Some(0.2));
        assert_eq!(ds.target(0), Some(35.0));
    }

    #[test]
    fn missing_marker_becomes_missing() {
        let f = write_tmp("phi,rf\nNA,35\n");
        let ds = load_csv(f.path(), &phi_rf_schema(), &MissingMarkers::default()).unwrap();
        assert_eq!(ds.number(0, "phi").unwrap(), None);
        assert_eq!(ds.target(0), Some(35.0));
    }

    #[test]
    fn parse_failure_names_row_and_column() {
        let f = write_tmp("phi,rf\nabc,35\n");
        let err = load_csv(f.path(), &phi_rf_schema(), &MissingMarkers::default()).unwrap_err();
        match err {
            Error::ParseCell { row, column, value } => {
                assert_eq!(row, 1);
                assert_eq!(column, "phi");
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let f = write_tmp("porosity,rf\n0.2,35\n");
        let err = load_csv(f.path(), &phi_rf_schema(), &MissingMarkers::default()).unwrap_err();
        assert!(matches!(err, Error::HeaderMismatch { position: 0, .. }));
    }

    #[test]
    fn round_trip_preserves_cells_and_missing() {
        let schema = Schema::new(vec![
            ColumnSchema::new("phi", ColumnKind::Numeric, ColumnRole::Feature),
            ColumnSchema::new("lith", ColumnKind::Categorical, ColumnRole::Feature),
            ColumnSchema::new("rf", ColumnKind::Numeric, ColumnRole::Target),
        ])
        .unwrap();
        let ds = Dataset::new(
            schema.clone(),
            vec![
                vec![
                    Cell::Number(0.1234567890123),
                    Cell::Category("carbonate".into()),
                    Cell::Number(35.5),
                ],
                vec![Cell::Missing, Cell::Missing, Cell::Number(0.0)],
                vec![
                    Cell::Number(-1.5e-7),
                    Cell::Category("terrigenous".into()),
                    Cell::Missing,
                ],
            ],
        )
        .unwrap();
        let markers = MissingMarkers::default();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_csv(&ds, f.path(), &markers).unwrap();
        let reloaded = load_csv(f.path(), &schema, &markers).unwrap();
        assert_eq!(ds, reloaded);
    }
}
