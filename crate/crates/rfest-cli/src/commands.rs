//! Command implementations.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use rfest::cluster::{
    choose_k, cluster_profile, kmeans_fit, mean_silhouette, tsne_embed, KDiagnostic, TsneParams,
};
use rfest::curves::{fit_curve, indexed_training_records, CurveFamily};
use rfest::ensembles::{ForestParams, GbmParams};
use rfest::eval::{
    cross_validate, fit_pipeline, EvalConfig, EvaluationReport, ModelSpec, StackingSpec,
};
use rfest::model_io::ModelFile;
use rfest::synth::{generate, ScenarioConfig, ScenarioKind};
use rfest::tabular::{
    load_csv, make_folds, standardize, write_csv, ColumnKind, ColumnRole, Dataset, FoldSpec,
    MissingMarkers, Schema,
};

use crate::config::{
    Cli, ClusterArgs, Command, CurvefitArgs, EvaluateArgs, FileConfig, FitArgs, HyperArgs,
    PredictArgs, SynthArgs, UsageError,
};
use crate::svg;

const DEFAULT_SEED: u64 = 42;
const DEFAULT_ALPHAS: [f64; 2] = [0.8, 0.9];
const KMEANS_MAX_ITER: usize = 100;

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth(args) => cmd_synth(args, &file),
        Command::Fit(args) => cmd_fit(args, &file),
        Command::Predict(args) => cmd_predict(args, &file),
        Command::Evaluate(args) => cmd_evaluate(args, &file),
        Command::Cluster(args) => cmd_cluster(args, &file),
        Command::Curvefit(args) => cmd_curvefit(args, &file),
    }
}

/// Comment header embedded at the top of CSV outputs.
fn csv_preamble<C: Serialize>(config: &C) -> anyhow::Result<String> {
    Ok(format!(
        "# rfest {}\n# config: {}\n",
        rfest::VERSION,
        serde_json::to_string(config)?
    ))
}

fn load_dataset(input: &Path, schema: &Path) -> anyhow::Result<(Dataset, Schema)> {
    let schema = Schema::load(schema).with_context(|| format!("loading schema {schema:?}"))?;
    let ds = load_csv(input, &schema, &MissingMarkers::default())
        .with_context(|| format!("loading dataset {input:?}"))?;
    Ok((ds, schema))
}

/// Drops rows without a target, warning with the count.
fn require_targets(ds: &Dataset) -> anyhow::Result<Dataset> {
    if ds.schema().target_index().is_none() {
        anyhow::bail!("dataset schema declares no target column");
    }
    let keep: Vec<usize> = (0..ds.n_rows())
        .filter(|&r| ds.target(r).is_some())
        .collect();
    let dropped = ds.n_rows() - keep.len();
    if dropped > 0 {
        eprintln!("warning: excluded {dropped} rows without a target value");
    }
    Ok(ds.select_rows(&keep))
}

fn resolve_model(
    name: Option<&str>,
    file: &FileConfig,
    hyper: &HyperArgs,
) -> anyhow::Result<ModelSpec> {
    let name = name
        .map(str::to_string)
        .or_else(|| file.model.clone())
        .unwrap_or_else(|| "qrf".to_string());
    match name.as_str() {
        "qrf" => Ok(ModelSpec::QuantileForest(ForestParams {
            n_trees: hyper.trees.or(file.trees).unwrap_or(500),
            min_samples_leaf: hyper
                .min_samples_leaf
                .or(file.min_samples_leaf)
                .unwrap_or(5),
            max_depth: hyper.max_depth.or(file.max_depth),
            n_candidate_features: hyper.candidate_features.or(file.candidate_features),
        })),
        "gbm-icp" => Ok(ModelSpec::GbmIcp {
            gbm: GbmParams {
                n_stages: hyper.stages.or(file.stages).unwrap_or(300),
                shrinkage: hyper.shrinkage.or(file.shrinkage).unwrap_or(0.1),
                max_depth: Some(hyper.max_depth.or(file.max_depth).unwrap_or(3)),
                min_samples_leaf: hyper
                    .min_samples_leaf
                    .or(file.min_samples_leaf)
                    .unwrap_or(5),
            },
            split_ratio: hyper.split_ratio.or(file.split_ratio).unwrap_or(0.75),
        }),
        other => Err(UsageError(format!(
            "unknown model name {other:?}, expected \"qrf\" or \"gbm-icp\""
        ))
        .into()),
    }
}

fn resolve_stacking(stack: bool, file: &FileConfig) -> Option<StackingSpec> {
    let enabled = stack || file.stack.unwrap_or(false);
    if !enabled {
        return None;
    }
    Some(match &file.stacking_columns {
        Some(cols) => StackingSpec {
            delta_t_column: cols.delta_t.clone(),
            ooip_column: cols.ooip.clone(),
            cum_prod_column: cols.cum_prod.clone(),
        },
        None => StackingSpec::default(),
    })
}

fn resolve_alphas(flag: Option<&[f64]>, file: &FileConfig) -> anyhow::Result<Vec<f64>> {
    let mut alphas = flag
        .map(<[f64]>::to_vec)
        .or_else(|| file.alphas.clone())
        .unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
    for &alpha in &alphas {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(UsageError(format!("confidence level {alpha} outside (0, 1)")).into());
        }
    }
    alphas.sort_unstable_by(f64::total_cmp);
    alphas.dedup();
    Ok(alphas)
}

// ---------------------------------------------------------------- synth

fn cmd_synth(args: SynthArgs, file: &FileConfig) -> anyhow::Result<()> {
    let scenario = match args
        .scenario
        .or_else(|| file.scenario.clone())
        .unwrap_or_else(|| "pre".to_string())
        .as_str()
    {
        "pre" => ScenarioKind::PreProduction,
        "post" => ScenarioKind::PostProduction,
        other => {
            return Err(UsageError(format!(
                "unknown scenario {other:?}, expected \"pre\" or \"post\""
            ))
            .into())
        }
    };
    let base = match scenario {
        ScenarioKind::PreProduction => ScenarioConfig::pre(400, DEFAULT_SEED),
        ScenarioKind::PostProduction => ScenarioConfig::post(400, DEFAULT_SEED),
    };
    let cfg = ScenarioConfig {
        scenario,
        n: args.n.or(file.n).unwrap_or(base.n),
        noise_sigma: args
            .noise_sigma
            .or(file.noise_sigma)
            .unwrap_or(base.noise_sigma),
        cluster_separation: args
            .cluster_separation
            .or(file.cluster_separation)
            .unwrap_or(base.cluster_separation),
        missing_rate: args
            .missing_rate
            .or(file.missing_rate)
            .unwrap_or(base.missing_rate),
        seed: args.seed.or(file.seed).unwrap_or(base.seed),
    };

    let ds = generate(&cfg)?;
    write_csv(&ds, &args.out, &MissingMarkers::default())?;
    if let Some(schema_out) = &args.schema_out {
        ds.schema().save(schema_out)?;
    }

    #[derive(Serialize)]
    struct Sidecar<'a> {
        version: &'a str,
        command: &'a str,
        config: &'a ScenarioConfig,
        n_rows: usize,
    }
    let sidecar_path = args.out.with_extension("sidecar.json");
    std::fs::write(
        &sidecar_path,
        serde_json::to_string_pretty(&Sidecar {
            version: rfest::VERSION,
            command: "synth",
            config: &cfg,
            n_rows: ds.n_rows(),
        })?,
    )?;
    println!(
        "wrote {} rows to {} (sidecar {})",
        ds.n_rows(),
        args.out.display(),
        sidecar_path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- fit

fn cmd_fit(args: FitArgs, file: &FileConfig) -> anyhow::Result<()> {
    let (ds, _) = load_dataset(&args.input, &args.schema)?;
    let ds = require_targets(&ds)?;
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let config = EvalConfig {
        model: resolve_model(args.model.as_deref(), file, &args.hyper)?,
        stacking: resolve_stacking(args.stack, file),
        alphas: resolve_alphas(None, file)?,
        seed,
    };
    let pipeline = fit_pipeline(&ds, &config, seed)?;
    ModelFile::new(pipeline, &ds, seed).save(&args.out)?;
    println!("fitted on {} rows -> {}", ds.n_rows(), args.out.display());
    Ok(())
}

// ---------------------------------------------------------------- predict

fn cmd_predict(args: PredictArgs, file: &FileConfig) -> anyhow::Result<()> {
    let model = ModelFile::load(&args.model)?;
    let (ds, _) = load_dataset(&args.input, &args.schema)?;
    model.validate_schema(&ds)?;
    let alphas = resolve_alphas(args.alphas.as_deref(), file)?;

    let predictions = model.pipeline.predict_dataset(&ds, &alphas)?;

    #[derive(Serialize)]
    struct Echo<'a> {
        command: &'a str,
        model_file: String,
        schema_hash: &'a str,
        alphas: &'a [f64],
        seed: u64,
    }
    let mut out = csv_preamble(&Echo {
        command: "predict",
        model_file: args.model.display().to_string(),
        schema_hash: &model.schema_hash,
        alphas: &alphas,
        seed: model.seed,
    })?;
    out.push_str("row,y_hat");
    for alpha in &alphas {
        write!(out, ",lower_{alpha},upper_{alpha}")?;
    }
    out.push('\n');
    for (row, (point, intervals)) in predictions.iter().enumerate() {
        write!(out, "{row},{}", point.clamp(0.0, 100.0))?;
        for interval in intervals {
            let clamped = interval.clamped();
            write!(out, ",{},{}", clamped.lower, clamped.upper)?;
        }
        out.push('\n');
    }
    std::fs::write(&args.out, out)?;
    println!(
        "predicted {} rows -> {}",
        predictions.len(),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- evaluate

fn cmd_evaluate(args: EvaluateArgs, file: &FileConfig) -> anyhow::Result<()> {
    let (ds, _) = load_dataset(&args.input, &args.schema)?;

    let filter = args.filter.clone().or_else(|| file.filter.clone());
    let ds = match &filter {
        Some(spec) => {
            let (column, threshold) = spec
                .split_once(':')
                .and_then(|(c, t)| t.parse::<f64>().ok().map(|t| (c.to_string(), t)))
                .ok_or_else(|| UsageError(format!("--filter {spec:?} must be column:threshold")))?;
            ds.filter_rows(&column, threshold)?
        }
        None => ds,
    };
    let ds = require_targets(&ds)?;

    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let config = EvalConfig {
        model: resolve_model(args.model.as_deref(), file, &args.hyper)?,
        stacking: resolve_stacking(args.stack, file),
        alphas: resolve_alphas(args.alphas.as_deref(), file)?,
        seed,
    };
    let spec = if args.loo || file.loo.unwrap_or(false) {
        FoldSpec::LeaveOneOut
    } else {
        FoldSpec::KFold(args.folds.or(file.folds).unwrap_or(5))
    };
    let plan = make_folds(ds.n_rows(), spec, seed)?;
    let report = cross_validate(&ds, &config, &plan)?;

    std::fs::create_dir_all(&args.out_dir)?;
    write_report(&args.out_dir, &report, &filter)?;

    if args.plots {
        for (i, alpha) in report.alphas.iter().enumerate() {
            let points: Vec<(f64, f64, f64, f64)> = report
                .rows
                .iter()
                .map(|r| {
                    (
                        r.y_true,
                        r.y_hat,
                        r.intervals[i].lower,
                        r.intervals[i].upper,
                    )
                })
                .collect();
            svg::interval_fan(
                &points,
                *alpha,
                &args.out_dir.join(format!("interval_fan_{alpha}.svg")),
            )?;
        }
        let full = fit_pipeline(&ds, &config, seed)?;
        svg::importance_bars(
            &full.feature_importance(),
            &args.out_dir.join("importance.svg"),
        )?;
    }

    println!(
        "evaluated {} rows over {} folds: MAE {:.3}, R2 {:.3} -> {}",
        report.n_rows,
        report.fold_k,
        report.metrics.mae,
        report.metrics.r2,
        args.out_dir.display()
    );
    Ok(())
}

fn write_report(
    out_dir: &Path,
    report: &EvaluationReport,
    filter: &Option<String>,
) -> anyhow::Result<()> {
    #[derive(Serialize)]
    struct Echo<'a> {
        command: &'a str,
        config: &'a EvalConfig,
        filter: &'a Option<String>,
        fold_k: usize,
        leave_one_out: bool,
        fold_seed: u64,
    }
    let echo = Echo {
        command: "evaluate",
        config: &report.config,
        filter,
        fold_k: report.fold_k,
        leave_one_out: report.leave_one_out,
        fold_seed: report.fold_seed,
    };

    let mut rows_csv = csv_preamble(&echo)?;
    rows_csv.push_str("row,fold,y_true,y_hat");
    for alpha in &report.alphas {
        write!(rows_csv, ",lower_{alpha},upper_{alpha}")?;
    }
    rows_csv.push('\n');
    for row in &report.rows {
        write!(
            rows_csv,
            "{},{},{},{}",
            row.row, row.fold, row.y_true, row.y_hat
        )?;
        for interval in &row.intervals {
            write!(rows_csv, ",{},{}", interval.lower, interval.upper)?;
        }
        rows_csv.push('\n');
    }
    std::fs::write(out_dir.join("report_rows.csv"), rows_csv)?;

    #[derive(Serialize)]
    struct Summary<'a> {
        version: &'a str,
        command: &'a str,
        config: &'a EvalConfig,
        filter: &'a Option<String>,
        fold_k: usize,
        leave_one_out: bool,
        fold_seed: u64,
        n_rows: usize,
        metrics: &'a rfest::eval::ReportMetrics,
        curve_params: &'a [rfest::eval::FoldCurveParams],
    }
    std::fs::write(
        out_dir.join("report_summary.json"),
        serde_json::to_string_pretty(&Summary {
            version: rfest::VERSION,
            command: "evaluate",
            config: &report.config,
            filter,
            fold_k: report.fold_k,
            leave_one_out: report.leave_one_out,
            fold_seed: report.fold_seed,
            n_rows: report.n_rows,
            metrics: &report.metrics,
            curve_params: &report.curve_params,
        })?,
    )?;
    Ok(())
}

// ---------------------------------------------------------------- cluster

fn cmd_cluster(args: ClusterArgs, file: &FileConfig) -> anyhow::Result<()> {
    let (ds, _) = load_dataset(&args.input, &args.schema)?;
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);

    // pre-production cluster workflow: rows with at most one missing feature,
    // numeric features median-imputed and standardized; target excluded
    let kept_rows = ds.rows_with_at_most_missing(1);
    if kept_rows.len() < 5 {
        anyhow::bail!(
            "only {} rows with at most one missing feature, need at least 5",
            kept_rows.len()
        );
    }
    let subset = ds.select_rows(&kept_rows);
    let numeric_features: Vec<String> = subset
        .schema()
        .columns
        .iter()
        .filter(|c| c.role == ColumnRole::Feature && c.kind == ColumnKind::Numeric)
        .map(|c| c.name.clone())
        .collect();
    let (scaled, _) = standardize(&subset, &numeric_features)?;
    let x = scaled.feature_matrix(&numeric_features)?;

    let (model, diagnostics) = match args.k.or(file.k) {
        Some(k) => {
            let model = kmeans_fit(&x, k, seed, KMEANS_MAX_ITER)?;
            let silhouette = mean_silhouette(&x, &model.assignments, k);
            let diag = vec![KDiagnostic {
                k,
                inertia: model.inertia,
                mean_silhouette: silhouette,
            }];
            (model, diag)
        }
        None => {
            let k_max = args.k_max.or(file.k_max).unwrap_or(8).min(x.n_rows() - 1);
            let diagnostics = choose_k(&x, k_max, seed, KMEANS_MAX_ITER)?;
            let model = kmeans_fit(&x, diagnostics.selected_k, seed, KMEANS_MAX_ITER)?;
            (model, diagnostics.table)
        }
    };

    let perplexity = args
        .perplexity
        .or(file.perplexity)
        .unwrap_or(30.0)
        .min((x.n_rows() - 1) as f64);
    let tsne_params = TsneParams {
        perplexity,
        iterations: args.iterations.or(file.iterations).unwrap_or(1000),
        learning_rate: 200.0,
        seed,
    };
    let embedding = tsne_embed(&x, &tsne_params)?;

    std::fs::create_dir_all(&args.out_dir)?;

    #[derive(Serialize)]
    struct Echo<'a> {
        command: &'a str,
        k: usize,
        seed: u64,
        tsne: &'a TsneParams,
        n_rows_clustered: usize,
    }
    let echo = Echo {
        command: "cluster",
        k: model.k,
        seed,
        tsne: &tsne_params,
        n_rows_clustered: x.n_rows(),
    };

    let mut assignments_csv = csv_preamble(&echo)?;
    assignments_csv.push_str("row,cluster,x,y\n");
    for (i, &orig_row) in kept_rows.iter().enumerate() {
        writeln!(
            assignments_csv,
            "{},{},{},{}",
            orig_row, model.assignments[i], embedding.coords[i][0], embedding.coords[i][1]
        )?;
    }
    std::fs::write(args.out_dir.join("assignments.csv"), assignments_csv)?;

    #[derive(Serialize)]
    struct Diagnostics<'a> {
        version: &'a str,
        command: &'a str,
        seed: u64,
        selected_k: usize,
        inertia: f64,
        iterations: usize,
        table: &'a [KDiagnostic],
        tsne_final_kl: f64,
        tsne_exaggeration_end_kl: f64,
        perplexity: f64,
    }
    std::fs::write(
        args.out_dir.join("diagnostics.json"),
        serde_json::to_string_pretty(&Diagnostics {
            version: rfest::VERSION,
            command: "cluster",
            seed,
            selected_k: model.k,
            inertia: model.inertia,
            iterations: model.iterations,
            table: &diagnostics,
            tsne_final_kl: embedding.final_kl,
            tsne_exaggeration_end_kl: embedding.exaggeration_end_kl,
            perplexity,
        })?,
    )?;

    let profile = cluster_profile(&subset, &model)?;
    #[derive(Serialize)]
    struct ProfileDoc<'a> {
        version: &'a str,
        command: &'a str,
        seed: u64,
        profile: &'a rfest::cluster::ClusterProfileReport,
    }
    std::fs::write(
        args.out_dir.join("profile.json"),
        serde_json::to_string_pretty(&ProfileDoc {
            version: rfest::VERSION,
            command: "cluster",
            seed,
            profile: &profile,
        })?,
    )?;

    if args.plots {
        let points: Vec<(f64, f64, usize)> = embedding
            .coords
            .iter()
            .zip(&model.assignments)
            .map(|(c, &cluster)| (c[0], c[1], cluster))
            .collect();
        svg::scatter(&points, &args.out_dir.join("embedding.svg"))?;
    }

    println!(
        "clustered {} rows into k={} (final KL {:.4}) -> {}",
        x.n_rows(),
        model.k,
        embedding.final_kl,
        args.out_dir.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- curvefit

fn cmd_curvefit(args: CurvefitArgs, file: &FileConfig) -> anyhow::Result<()> {
    let (ds, _) = load_dataset(&args.input, &args.schema)?;
    let stacking = resolve_stacking(true, file).expect("stacking forced on");
    let records = indexed_training_records(
        &ds,
        &stacking.delta_t_column,
        &stacking.ooip_column,
        &stacking.cum_prod_column,
    )?;
    if records.is_empty() {
        anyhow::bail!(
            "no usable curve records (need delta_t, OOIP, cumulative production and target)"
        );
    }

    let family_names = args
        .families
        .clone()
        .or_else(|| file.families.clone())
        .unwrap_or_else(|| {
            vec![
                "exp_simple".to_string(),
                "hyp_simple".to_string(),
                "exp_v".to_string(),
                "hyp_v".to_string(),
            ]
        });
    let mut families = Vec::new();
    for name in &family_names {
        families.push(match name.as_str() {
            "exp_simple" => CurveFamily::ExpSimple,
            "hyp_simple" => CurveFamily::HypSimple,
            "exp_v" => CurveFamily::ExpV,
            "hyp_v" => CurveFamily::HypV,
            other => {
                return Err(UsageError(format!("unknown curve family {other:?}")).into());
            }
        });
    }

    let bare: Vec<rfest::curves::CurveRecord> = records.iter().map(|(_, r)| *r).collect();
    let mut fits = Vec::new();
    for family in &families {
        fits.push(fit_curve(&bare, *family)?);
    }

    std::fs::create_dir_all(&args.out_dir)?;

    #[derive(Serialize)]
    struct Echo<'a> {
        command: &'a str,
        families: &'a [String],
        columns: &'a StackingSpec,
        n_records: usize,
    }
    let echo = Echo {
        command: "curvefit",
        families: &family_names,
        columns: &stacking,
        n_records: records.len(),
    };

    #[derive(Serialize)]
    struct CurvesDoc<'a> {
        version: &'a str,
        command: &'a str,
        columns: &'a StackingSpec,
        n_records: usize,
        fits: &'a [rfest::curves::CurveModel],
    }
    std::fs::write(
        args.out_dir.join("curves.json"),
        serde_json::to_string_pretty(&CurvesDoc {
            version: rfest::VERSION,
            command: "curvefit",
            columns: &stacking,
            n_records: records.len(),
            fits: &fits,
        })?,
    )?;

    let mut residuals = csv_preamble(&echo)?;
    residuals.push_str("family,row,delta_t,ooip,cum_prod,rf_true_pct,rf_est_pct,residual_pct\n");
    for fit in &fits {
        for (row, record) in &records {
            if record.delta_t < 1.0 {
                continue;
            }
            let est = rfest::curves::rf_estimate(fit, record.p, record.delta_t, record.v)? * 100.0;
            let truth = record.rf * 100.0;
            writeln!(
                residuals,
                "{},{},{},{},{},{},{},{}",
                fit.family.label(),
                row,
                record.delta_t,
                record.v,
                record.p,
                truth,
                est,
                est - truth
            )?;
        }
    }
    std::fs::write(args.out_dir.join("residuals.csv"), residuals)?;

    let mut samples = csv_preamble(&echo)?;
    samples.push_str("family,v_level,delta_t,f\n");
    let mut vs: Vec<f64> = records.iter().map(|(_, r)| r.v).collect();
    vs.sort_unstable_by(f64::total_cmp);
    let v_levels = [vs[vs.len() / 4], vs[vs.len() / 2], vs[3 * vs.len() / 4]];
    for fit in &fits {
        for &v in &v_levels {
            for dt in 0..=60 {
                let f = rfest::curves::eval_curve(fit, dt as f64, v)?;
                writeln!(samples, "{},{},{},{}", fit.family.label(), v, dt, f)?;
            }
        }
    }
    std::fs::write(args.out_dir.join("curve_samples.csv"), samples)?;

    println!(
        "fitted {} families on {} records -> {}",
        fits.len(),
        records.len(),
        args.out_dir.display()
    );
    Ok(())
}
