//! Versioned, self-describing model files.
//!
//! A model file is a JSON document carrying the format name, a major/minor
//! version, the software version, the fingerprint and full description of
//! the feature columns the model consumes, the seed, and the fitted pipeline
//! (encoders, curve models, ensemble with leaf memberships). Loading a file
//! whose major version is newer than this build fails loudly; minor-version
//! drift is accepted.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::FittedPipeline;
use crate::tabular::{ColumnRole, ColumnSchema, Dataset};

pub const MODEL_FORMAT: &str = "rfest-model";
pub const MODEL_MAJOR: u32 = 1;
pub const MODEL_MINOR: u32 = 0;

/// On-disk model document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub major: u32,
    pub minor: u32,
    pub created_by: String,
    /// Fingerprint of `input_features`.
    pub schema_hash: String,
    /// Feature columns (name + kind) of datasets this model consumes.
    pub input_features: Vec<ColumnSchema>,
    pub seed: u64,
    pub pipeline: FittedPipeline,
}

/// FNV-1a fingerprint of the feature columns (names and kinds, in order).
pub fn schema_fingerprint(columns: &[ColumnSchema]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x100_0000_01b3);
        }
    };
    for col in columns {
        feed(col.name.as_bytes());
        feed(b"|");
        feed(format!("{:?}", col.kind).as_bytes());
        feed(b";");
    }
    format!("{hash:016x}")
}

/// Feature columns of a dataset, as stored in model files.
pub fn dataset_feature_columns(ds: &Dataset) -> Vec<ColumnSchema> {
    ds.schema()
        .columns
        .iter()
        .filter(|c| c.role == ColumnRole::Feature)
        .cloned()
        .collect()
}

impl ModelFile {
    pub fn new(pipeline: FittedPipeline, train: &Dataset, seed: u64) -> Self {
        let input_features = dataset_feature_columns(train);
        Self {
            format: MODEL_FORMAT.to_string(),
            major: MODEL_MAJOR,
            minor: MODEL_MINOR,
            created_by: format!("rfest {}", crate::VERSION),
            schema_hash: schema_fingerprint(&input_features),
            input_features,
            seed,
            pipeline,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ModelFile> {
        let text = std::fs::read_to_string(path)?;
        let file: ModelFile = serde_json::from_str(&text)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!(
                "unexpected format {:?}, expected {MODEL_FORMAT:?}",
                file.format
            )));
        }
        if file.major > MODEL_MAJOR {
            return Err(Error::ModelVersionTooNew {
                found: file.major,
                supported: MODEL_MAJOR,
            });
        }
        Ok(file)
    }

    /// Checks a dataset's feature columns against the stored fingerprint,
    /// naming every drifted column on mismatch.
    pub fn validate_schema(&self, ds: &Dataset) -> Result<()> {
        let found = dataset_feature_columns(ds);
        if schema_fingerprint(&found) == self.schema_hash {
            return Ok(());
        }
        let mut drifted = Vec::new();
        let expected_names: Vec<&str> = self
            .input_features
            .iter()
            .map(|c| c.name.as_str())
            .collect();
        let found_names: Vec<&str> = found.iter().map(|c| c.name.as_str()).collect();
        for col in &self.input_features {
            match found.iter().find(|c| c.name == col.name) {
                None => drifted.push(format!("missing column {:?}", col.name)),
                Some(f) if f.kind != col.kind => {
                    drifted.push(format!("column {:?} changed kind", col.name))
                }
                Some(_) => {}
            }
        }
        for col in &found {
            if !expected_names.contains(&col.name.as_str()) {
                drifted.push(format!("unexpected column {:?}", col.name));
            }
        }
        if drifted.is_empty() {
            drifted.push(format!(
                "column order differs: expected [{}], found [{}]",
                expected_names.join(", "),
                found_names.join(", ")
            ));
        }
        Err(Error::SchemaMismatch(drifted.join("; ")))
    }
}
