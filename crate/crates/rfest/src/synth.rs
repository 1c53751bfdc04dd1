//! Deterministic synthetic reservoir scenarios.
//!
//! Two regimes mirror the modelling workflows without any proprietary data.
//! All generating equations are documented here and in `docs/scenarios.md`
//! so the acceptance thresholds stay auditable; generators are pure
//! functions of their config.
//!
//! Pre-production: two latent reservoir populations. Cluster A
//! (terrigenous-like: high porosity and permeability, young rock) has a
//! smooth nonlinear recovery-factor law; cluster B (carbonate-like) has a
//! weak law with a large intrinsic spread. `cluster_separation` scales every
//! between-cluster mean offset; at 0 the populations coincide.
//!
//! Post-production: recovery factor, OOIP and years on production are drawn
//! independently; cumulative production follows the hyperbolic law
//! P = rf * V * f_hyp(dt, w) * (1 + eps) with w = W1_TRUE * sqrt(V) + W0_TRUE
//! and multiplicative noise eps ~ N(0, noise_sigma) truncated to |eps| <=
//! 0.3, which keeps P <= V for every row. P/V is therefore a lower bound on
//! the true recovery factor at zero noise.
//!
//! The latent cluster label and the depletion fraction are meta columns: they
//! never enter the feature matrix but let tests and workflows recover the
//! generator truth. Missing cells are injected into feature columns only
//! (never the target) from an independent random stream, so changing
//! `missing_rate` does not shift the underlying values.

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::stream_rng;
use crate::tabular::{Cell, ColumnKind, ColumnRole, ColumnSchema, Dataset, Schema};

/// Slope intercept of the post-production generating law, in years.
pub const POST_W0_TRUE: f64 = 3.5;
/// sqrt(OOIP) coefficient of the post-production generating law.
pub const POST_W1_TRUE: f64 = 2.2;

/// Which scenario to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    PreProduction,
    PostProduction,
}

/// Generator configuration; a config fully determines the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub n: usize,
    /// Pre-production: additive RF noise in percentage points.
    /// Post-production: multiplicative noise on cumulative production.
    pub noise_sigma: f64,
    /// Pre-production only; scales the between-cluster mean offsets.
    pub cluster_separation: f64,
    pub missing_rate: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Pre-production defaults: separation on, mild noise, sparse missing.
    pub fn pre(n: usize, seed: u64) -> Self {
        Self {
            scenario: ScenarioKind::PreProduction,
            n,
            noise_sigma: 2.0,
            cluster_separation: 1.0,
            missing_rate: 0.05,
            seed,
        }
    }

    /// Post-production defaults: 2% production noise, complete rows.
    pub fn post(n: usize, seed: u64) -> Self {
        Self {
            scenario: ScenarioKind::PostProduction,
            n,
            noise_sigma: 0.02,
            cluster_separation: 0.0,
            missing_rate: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidScenario("n must be at least 1".to_string()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "noise_sigma {} must be a finite non-negative number",
                self.noise_sigma
            )));
        }
        if !(self.cluster_separation.is_finite() && self.cluster_separation >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "cluster_separation {} must be a finite non-negative number",
                self.cluster_separation
            )));
        }
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(Error::InvalidScenario(format!(
                "missing_rate {} outside [0, 1)",
                self.missing_rate
            )));
        }
        Ok(())
    }
}

/// Dispatches on the configured scenario.
pub fn generate(cfg: &ScenarioConfig) -> Result<Dataset> {
    match cfg.scenario {
        ScenarioKind::PreProduction => generate_pre(cfg),
        ScenarioKind::PostProduction => generate_post(cfg),
    }
}

/// Column name of the latent cluster label in pre-production datasets.
pub const LATENT_CLUSTER_COLUMN: &str = "latent_cluster";
/// Column name of the depletion meta column in pre-production datasets.
pub const DEPLETION_COLUMN: &str = "depletion_fraction";

fn normal(rng: &mut impl Rng, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd).expect("valid normal").sample(rng)
}

fn lognormal(rng: &mut impl Rng, mu: f64, sigma: f64) -> f64 {
    LogNormal::new(mu, sigma)
        .expect("valid lognormal")
        .sample(rng)
}

/// Injects missing cells into feature columns from an independent stream.
fn inject_missing(ds: Dataset, rate: f64, seed: u64) -> Result<Dataset> {
    if rate <= 0.0 {
        return Ok(ds);
    }
    let mut rng = stream_rng(seed, 1);
    let feature_cols: Vec<usize> = ds
        .schema()
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.role == ColumnRole::Feature)
        .map(|(i, _)| i)
        .collect();
    let mut rows = ds.rows().to_vec();
    for row in rows.iter_mut() {
        for &c in &feature_cols {
            if rng.random::<f64>() < rate {
                row[c] = Cell::Missing;
            }
        }
    }
    Dataset::new(ds.schema().clone(), rows)
}

/// Pre-production scenario: two latent reservoir populations.
pub fn generate_pre(cfg: &ScenarioConfig) -> Result<Dataset> {
    cfg.validate()?;
    let schema = Schema::new(vec![
        ColumnSchema::new(
            "thickness_net_pay_m",
            ColumnKind::Numeric,
            ColumnRole::Feature,
        )
        .with_unit("m"),
        ColumnSchema::new("net_gross_ratio", ColumnKind::Numeric, ColumnRole::Feature),
        ColumnSchema::new("porosity_pct", ColumnKind::Numeric, ColumnRole::Feature).with_unit("%"),
        ColumnSchema::new(
            "water_saturation_pct",
            ColumnKind::Numeric,
            ColumnRole::Feature,
        )
        .with_unit("%"),
        ColumnSchema::new("fvf_oil", ColumnKind::Numeric, ColumnRole::Feature).with_unit("m3/m3"),
        ColumnSchema::new("depth_top_m", ColumnKind::Numeric, ColumnRole::Feature).with_unit("m"),
        ColumnSchema::new("temperature_c", ColumnKind::Numeric, ColumnRole::Feature)
            .with_unit("deg C"),
        ColumnSchema::new("pressure_atm", ColumnKind::Numeric, ColumnRole::Feature)
            .with_unit("atm"),
        ColumnSchema::new("permeability_md", ColumnKind::Numeric, ColumnRole::Feature)
            .with_unit("mD"),
        ColumnSchema::new(
            "reservoir_age_myr",
            ColumnKind::Numeric,
            ColumnRole::Feature,
        )
        .with_unit("mln years"),
        ColumnSchema::new("api_gravity", ColumnKind::Numeric, ColumnRole::Feature)
            .with_unit("deg API"),
        ColumnSchema::new("viscosity_cp", ColumnKind::Numeric, ColumnRole::Feature).with_unit("cp"),
        ColumnSchema::new(
            "water_salinity_ppm",
            ColumnKind::Numeric,
            ColumnRole::Feature,
        )
        .with_unit("ppm"),
        ColumnSchema::new("ooip_mln_t", ColumnKind::Numeric, ColumnRole::Feature)
            .with_unit("mln t"),
        ColumnSchema::new("gor_initial", ColumnKind::Numeric, ColumnRole::Feature)
            .with_unit("m3/t"),
        ColumnSchema::new("lithology", ColumnKind::Categorical, ColumnRole::Feature),
        ColumnSchema::new(
            "structural_dip_deg",
            ColumnKind::Numeric,
            ColumnRole::Feature,
        )
        .with_unit("deg"),
        ColumnSchema::new(
            LATENT_CLUSTER_COLUMN,
            ColumnKind::Categorical,
            ColumnRole::Meta,
        ),
        ColumnSchema::new(DEPLETION_COLUMN, ColumnKind::Numeric, ColumnRole::Meta),
        ColumnSchema::new("rf_pct", ColumnKind::Numeric, ColumnRole::Target).with_unit("%"),
    ])?;

    let s = cfg.cluster_separation;
    let mut rng = stream_rng(cfg.seed, 0);
    let mut rows = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let in_a = rng.random::<f64>() < 0.5;

        // cluster-informative draws
        let porosity = if in_a {
            normal(&mut rng, 24.0, 2.5)
        } else {
            normal(&mut rng, 24.0 - 9.0 * s, 2.5)
        }
        .clamp(1.0, 40.0);
        let log10_perm = if in_a {
            normal(&mut rng, 2.8, 0.35)
        } else {
            normal(&mut rng, 2.8 - 1.7 * s, 0.35)
        };
        let permeability = 10f64.powf(log10_perm);
        let age = if in_a {
            normal(&mut rng, 110.0, 35.0)
        } else {
            normal(&mut rng, 110.0 + 230.0 * s, 45.0)
        }
        .clamp(1.0, 600.0);
        let net_gross = if in_a {
            normal(&mut rng, 0.72, 0.10)
        } else {
            normal(&mut rng, 0.72 - 0.18 * s, 0.12)
        }
        .clamp(0.05, 0.98);
        let terr_prob = if in_a {
            0.5 + 0.48 * s.min(1.0)
        } else {
            0.5 - 0.15 * s.min(1.0)
        };
        let lithology = if rng.random::<f64>() < terr_prob {
            "terrigenous"
        } else {
            "carbonate"
        };

        // shared nuisance draws
        let thickness = lognormal(&mut rng, 12f64.ln(), 0.5);
        let water_sat = normal(&mut rng, 30.0, 8.0).clamp(5.0, 80.0);
        let fvf = normal(&mut rng, 1.25, 0.12).clamp(1.0, 1.8);
        let depth = normal(&mut rng, 2200.0, 600.0).clamp(300.0, 4500.0);
        let temperature = 15.0 + 0.03 * depth + normal(&mut rng, 0.0, 5.0);
        let pressure = 0.1 * depth + normal(&mut rng, 0.0, 10.0);
        let api = normal(&mut rng, 32.0, 5.0).clamp(10.0, 50.0);
        let viscosity = lognormal(&mut rng, 3f64.ln(), 0.7);
        let salinity = lognormal(&mut rng, 30_000f64.ln(), 0.8);
        let ooip = lognormal(&mut rng, 40f64.ln(), 1.0).clamp(0.5, 1500.0);
        let gor = lognormal(&mut rng, 80f64.ln(), 0.6);
        let dip = lognormal(&mut rng, 6f64.ln(), 0.6).clamp(0.0, 45.0);
        let depletion = rng.random_range(0.82..1.0);

        // recovery-factor laws
        let rf = if in_a {
            46.0 + 1.4 * (porosity - 24.0) + 9.0 * (log10_perm - 2.8) + 30.0 * (net_gross - 0.72)
                - 3.0 * (1.0 + viscosity / 3.0).ln()
                - 0.15 * (water_sat - 30.0)
                + normal(&mut rng, 0.0, cfg.noise_sigma)
        } else {
            let intrinsic = (cfg.noise_sigma * cfg.noise_sigma + 5.5 * 5.5).sqrt();
            30.0 + 0.35 * (porosity - 15.0)
                + 1.5 * (log10_perm - 1.1)
                + normal(&mut rng, 0.0, intrinsic)
        }
        .clamp(2.0, 98.0);

        rows.push(vec![
            Cell::Number(thickness),
            Cell::Number(net_gross),
            Cell::Number(porosity),
            Cell::Number(water_sat),
            Cell::Number(fvf),
            Cell::Number(depth),
            Cell::Number(temperature),
            Cell::Number(pressure),
            Cell::Number(permeability),
            Cell::Number(age),
            Cell::Number(api),
            Cell::Number(viscosity),
            Cell::Number(salinity),
            Cell::Number(ooip),
            Cell::Number(gor),
            Cell::Category(lithology.to_string()),
            Cell::Number(dip),
            Cell::Category(if in_a { "A" } else { "B" }.to_string()),
            Cell::Number(depletion),
            Cell::Number(rf),
        ]);
    }

    inject_missing(Dataset::new(schema, rows)?, cfg.missing_rate, cfg.seed)
}

/// Post-production scenario: production quantities follow the hyperbolic law.
pub fn generate_post(cfg: &ScenarioConfig) -> Result<Dataset> {
    cfg.validate()?;
    let schema = Schema::new(vec![
        ColumnSchema::new("delta_t_years", ColumnKind::Numeric, ColumnRole::Feature)
            .with_unit("years"),
        ColumnSchema::new("ooip_mln_t", ColumnKind::Numeric, ColumnRole::Feature)
            .with_unit("mln t"),
        ColumnSchema::new("cum_prod_mln_t", ColumnKind::Numeric, ColumnRole::Feature)
            .with_unit("mln t"),
        ColumnSchema::new("porosity_pct", ColumnKind::Numeric, ColumnRole::Feature).with_unit("%"),
        ColumnSchema::new("depth_top_m", ColumnKind::Numeric, ColumnRole::Feature).with_unit("m"),
        ColumnSchema::new("api_gravity", ColumnKind::Numeric, ColumnRole::Feature)
            .with_unit("deg API"),
        ColumnSchema::new("viscosity_cp", ColumnKind::Numeric, ColumnRole::Feature).with_unit("cp"),
        ColumnSchema::new("water_cut_pct", ColumnKind::Numeric, ColumnRole::Feature).with_unit("%"),
        ColumnSchema::new(
            "well_count_producing",
            ColumnKind::Numeric,
            ColumnRole::Feature,
        ),
        ColumnSchema::new("basin_type", ColumnKind::Categorical, ColumnRole::Feature),
        ColumnSchema::new("rf_pct", ColumnKind::Numeric, ColumnRole::Target).with_unit("%"),
    ])?;

    const BASINS: [&str; 4] = ["foreland", "rift", "passive_margin", "intracratonic"];
    let mut rng = stream_rng(cfg.seed, 0);
    let mut rows = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let v = lognormal(&mut rng, 50f64.ln(), 1.2).clamp(1.0, 3000.0);
        let rf = normal(&mut rng, 0.32, 0.09).clamp(0.06, 0.72);
        let delta_t = rng.random_range(2.0..55.0);
        let w = POST_W1_TRUE * v.sqrt() + POST_W0_TRUE;
        let f = delta_t / (delta_t + w);
        let eps = if cfg.noise_sigma > 0.0 {
            normal(&mut rng, 0.0, cfg.noise_sigma).clamp(-0.3, 0.3)
        } else {
            0.0
        };
        let p = rf * v * f * (1.0 + eps);

        let porosity = normal(&mut rng, 20.0, 4.0).clamp(2.0, 38.0);
        let depth = normal(&mut rng, 2000.0, 500.0).clamp(300.0, 4200.0);
        let api = normal(&mut rng, 33.0, 4.0).clamp(12.0, 48.0);
        let viscosity = lognormal(&mut rng, 2f64.ln(), 0.5);
        let water_cut = (10.0 + 80.0 * f + normal(&mut rng, 0.0, 8.0)).clamp(0.0, 99.0);
        let well_count = lognormal(&mut rng, 25f64.ln(), 0.8).round().max(1.0);
        let basin = BASINS[rng.random_range(0..BASINS.len())];

        rows.push(vec![
            Cell::Number(delta_t),
            Cell::Number(v),
            Cell::Number(p),
            Cell::Number(porosity),
            Cell::Number(depth),
            Cell::Number(api),
            Cell::Number(viscosity),
            Cell::Number(water_cut),
            Cell::Number(well_count),
            Cell::Category(basin.to_string()),
            Cell::Number(rf * 100.0),
        ]);
    }

    inject_missing(Dataset::new(schema, rows)?, cfg.missing_rate, cfg.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{rf_estimate, CurveFamily, CurveModel, CurveParams};

    #[test]
    fn generators_are_pure_functions_of_config() {
        let cfg = ScenarioConfig::pre(60, 42);
        assert_eq!(generate_pre(&cfg).unwrap(), generate_pre(&cfg).unwrap());
        let cfg = ScenarioConfig::post(60, 42);
        assert_eq!(generate_post(&cfg).unwrap(), generate_post(&cfg).unwrap());
    }

    #[test]
    fn missing_rate_preserves_underlying_values() {
        let complete = generate_post(&ScenarioConfig {
            missing_rate: 0.0,
            ..ScenarioConfig::post(50, 7)
        })
        .unwrap();
        let sparse = generate_post(&ScenarioConfig {
            missing_rate: 0.3,
            ..ScenarioConfig::post(50, 7)
        })
        .unwrap();
        let mut masked = 0;
        for row in 0..50 {
            for col in 0..complete.schema().len() {
                match (complete.cell(row, col), sparse.cell(row, col)) {
                    (a, b) if a == b => {}
                    (_, Cell::Missing) => masked += 1,
                    (a, b) => panic!("cell changed: {a:?} -> {b:?}"),
                }
            }
        }
        assert!(masked > 0);
        // targets never masked
        for row in 0..50 {
            assert!(sparse.target(row).is_some());
        }
    }

    #[test]
    fn post_noiseless_inverse_recovers_the_target() {
        let ds = generate_post(&ScenarioConfig {
            noise_sigma: 0.0,
            ..ScenarioConfig::post(100, 3)
        })
        .unwrap();
        let truth = CurveModel {
            family: CurveFamily::HypV,
            params: CurveParams::WithV {
                w0: POST_W0_TRUE,
                w1: POST_W1_TRUE,
            },
            loss: 0.0,
            n_records: 0,
            iterations: 0,
        };
        for row in 0..ds.n_rows() {
            let dt = ds.number(row, "delta_t_years").unwrap().unwrap();
            let v = ds.number(row, "ooip_mln_t").unwrap().unwrap();
            let p = ds.number(row, "cum_prod_mln_t").unwrap().unwrap();
            let rf = ds.target(row).unwrap() / 100.0;
            let estimate = rf_estimate(&truth, p, dt, v).unwrap();
            assert!(
                (estimate - rf).abs() < 1e-9,
                "row {row}: {estimate} vs {rf}"
            );
            // the generative law keeps P below V and P/V below rf
            assert!(p <= v);
            assert!(p / v <= rf + 1e-12);
        }
    }

    #[test]
    fn pre_scenario_has_both_clusters_and_meta_columns() {
        let ds = generate_pre(&ScenarioConfig::pre(200, 5)).unwrap();
        let label_idx = ds.column_index(LATENT_CLUSTER_COLUMN).unwrap();
        let mut a = 0;
        let mut b = 0;
        for row in 0..ds.n_rows() {
            match ds.cell(row, label_idx).as_category() {
                Some("A") => a += 1,
                Some("B") => b += 1,
                other => panic!("unexpected label {other:?}"),
            }
            assert!(ds.target(row).is_some());
        }
        assert!(a > 50 && b > 50, "unbalanced clusters: {a} vs {b}");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = ScenarioConfig::pre(0, 1);
        assert!(generate_pre(&cfg).is_err());
        cfg = ScenarioConfig {
            missing_rate: 1.0,
            ..ScenarioConfig::pre(10, 1)
        };
        assert!(generate_pre(&cfg).is_err());
        cfg = ScenarioConfig {
            noise_sigma: -1.0,
            ..ScenarioConfig::post(10, 1)
        };
        assert!(generate_post(&cfg).is_err());
    }
}
