//! Column schema: names, kinds and roles.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a column holds numbers or category labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// How a column participates in modelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Feature,
    Target,
    Meta,
}

/// One column description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub role: ColumnRole,
    /// Unit note, documentation only.
    #[serde(default)]
    pub unit: String,
}

impl ColumnSchema {
    pub fn new(name: &str, kind: ColumnKind, role: ColumnRole) -> Self {
        Self {
            name: name.to_string(),
            kind,
            role,
            unit: String::new(),
        }
    }

    pub fn with_unit(mut self, unit: &str) -> Self {
        self.unit = unit.to_string();
        self
    }
}

/// Ordered column list with uniqueness and single-target validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSchema>,
}

impl Schema {
    /// Validates name uniqueness and at most one target column.
    pub fn new(columns: Vec<ColumnSchema>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for col in &columns {
            if !seen.insert(col.name.clone()) {
                return Err(Error::Schema(format!(
                    "duplicate column name {:?}",
                    col.name
                )));
            }
        }
        let targets = columns
            .iter()
            .filter(|c| c.role == ColumnRole::Target)
            .count();
        if targets > 1 {
            return Err(Error::Schema(format!(
                "{targets} target columns, at most one allowed"
            )));
        }
        Ok(Self { columns })
    }

    /// Loads a schema from its JSON config file (`{"columns": [...]}`).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let schema: Schema = serde_json::from_str(&text)?;
        Schema::new(schema.columns)
    }

    /// Writes the schema config file.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::ColumnNotFound(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&ColumnSchema> {
        Ok(&self.columns[self.column_index(name)?])
    }

    /// Index of the single target column, if declared.
    pub fn target_index(&self) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.role == ColumnRole::Target)
    }

    /// Names of feature columns in schema order.
    pub fn feature_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.role == ColumnRole::Feature)
            .map(|c| c.name.clone())
            .collect()
    }

    /// Names of categorical feature columns in schema order.
    pub fn categorical_feature_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.role == ColumnRole::Feature && c.kind == ColumnKind::Categorical)
            .map(|c| c.name.clone())
            .collect()
    }
}
