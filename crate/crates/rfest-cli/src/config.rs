//! Command-line definitions and config-file merging.
//!
//! Settings resolve in order: explicit flag, then config-file value, then
//! the documented default. The resolved configuration is echoed into every
//! output file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

/// Invalid invocation (unknown model name, bad flag combination); exit 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(
    name = "rfest",
    version,
    about = "Recovery-factor estimation with calibrated prediction intervals"
)]
pub struct Cli {
    /// JSON config file; explicit flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic reservoir scenario CSV plus provenance sidecar.
    Synth(SynthArgs),
    /// Fit a model on a full dataset and write a versioned model file.
    Fit(FitArgs),
    /// Predict targets with intervals from a fitted model file.
    Predict(PredictArgs),
    /// Cross-validate a model configuration and write evaluation reports.
    Evaluate(EvaluateArgs),
    /// k-means + t-SNE cluster diagnostics, assignments and profiles.
    Cluster(ClusterArgs),
    /// Fit general production curves and emit parameters and residuals.
    Curvefit(CurvefitArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// pre | post
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[arg(long)]
    pub cluster_separation: Option<f64>,
    #[arg(long)]
    pub missing_rate: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path; the sidecar lands next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the schema config file for the generated dataset.
    #[arg(long)]
    pub schema_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// qrf | gbm-icp
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Enable curve stacking features.
    #[arg(long)]
    pub stack: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Confidence levels, e.g. 0.8,0.9
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// qrf | gbm-icp
    #[arg(long)]
    pub model: Option<String>,
    /// Number of folds (ignored when --loo is set).
    #[arg(long)]
    pub folds: Option<usize>,
    /// Leave-one-out cross-validation.
    #[arg(long)]
    pub loo: bool,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub stack: bool,
    /// Keep only rows with column >= threshold, e.g. depletion_fraction:0.9
    #[arg(long)]
    pub filter: Option<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Emit SVG plots (interval fan, importance bars).
    #[arg(long)]
    pub plots: bool,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Fixed cluster count; omit to select by silhouette up to --k-max.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub perplexity: Option<f64>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Emit the embedding scatter SVG.
    #[arg(long)]
    pub plots: bool,
}

#[derive(Debug, Args)]
pub struct CurvefitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Comma list of families: exp_simple,hyp_simple,exp_v,hyp_v (default all)
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Model hyperparameters shared by fit and evaluate.
#[derive(Debug, Args)]
pub struct HyperArgs {
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub stages: Option<usize>,
    #[arg(long)]
    pub shrinkage: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<u32>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    #[arg(long)]
    pub candidate_features: Option<usize>,
    #[arg(long)]
    pub split_ratio: Option<f64>,
}

/// Config-file counterpart of the flags; all fields optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub model: Option<String>,
    pub alphas: Option<Vec<f64>>,
    pub folds: Option<usize>,
    pub loo: Option<bool>,
    pub stack: Option<bool>,
    pub filter: Option<String>,
    pub scenario: Option<String>,
    pub n: Option<usize>,
    pub noise_sigma: Option<f64>,
    pub cluster_separation: Option<f64>,
    pub missing_rate: Option<f64>,
    pub k: Option<usize>,
    pub k_max: Option<usize>,
    pub perplexity: Option<f64>,
    pub iterations: Option<usize>,
    pub families: Option<Vec<String>>,
    pub trees: Option<usize>,
    pub stages: Option<usize>,
    pub shrinkage: Option<f64>,
    pub max_depth: Option<u32>,
    pub min_samples_leaf: Option<usize>,
    pub candidate_features: Option<usize>,
    pub split_ratio: Option<f64>,
    pub stacking_columns: Option<StackingColumns>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StackingColumns {
    pub delta_t: String,
    pub ooip: String,
    pub cum_prod: String,
}

impl FileConfig {
    pub fn load(path: Option<&std::path::Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                let config: FileConfig = serde_json::from_str(&text)
                    .map_err(|e| UsageError(format!("config file {path:?}: {e}")))?;
                Ok(config)
            }
        }
    }
}
