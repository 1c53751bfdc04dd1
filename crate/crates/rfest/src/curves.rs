//! General cumulative-production curves and recovery-factor stacking.
//!
//! A single depletion-fraction curve f(dt, V) is fit across all reservoirs
//! by minimizing the mean squared error of P / (V * f) against the observed
//! recovery factor. Two families are supported, each in a plain and an
//! OOIP-dependent variant:
//!
//! - hyperbolic: f = dt / (dt + w)
//! - exponential: f = 1 - exp(-dt / w)
//!
//! where the V-dependent variants substitute w -> w1 * sqrt(V) + w0. Both
//! families satisfy f(0, V) = 0 and f -> 1 as dt grows, for any admissible
//! parameters. The optimizer is gradient descent with backtracking step
//! halving, so the training loss is non-increasing across iterations.
//!
//! Recovery factors are fractions in (0, 1] inside this module; dataset
//! columns are percent and are converted at the boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::median;
use crate::tabular::Dataset;

/// Curve family: functional form and whether the slope depends on OOIP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveFamily {
    ExpSimple,
    HypSimple,
    ExpV,
    HypV,
}

impl CurveFamily {
    pub fn depends_on_v(self) -> bool {
        matches!(self, CurveFamily::ExpV | CurveFamily::HypV)
    }

    fn is_exponential(self) -> bool {
        matches!(self, CurveFamily::ExpSimple | CurveFamily::ExpV)
    }

    pub fn label(self) -> &'static str {
        match self {
            CurveFamily::ExpSimple => "exp_simple",
            CurveFamily::HypSimple => "hyp_simple",
            CurveFamily::ExpV => "exp_v",
            CurveFamily::HypV => "hyp_v",
        }
    }
}

/// Fitted curve parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveParams {
    Simple { w: f64 },
    WithV { w0: f64, w1: f64 },
}

/// One training observation: years on production, OOIP, cumulative
/// production (million tons) and the recovery factor as a fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub delta_t: f64,
    pub v: f64,
    pub p: f64,
    pub rf: f64,
}

impl CurveRecord {
    pub fn new(delta_t: f64, v: f64, p: f64, rf: f64) -> Result<Self> {
        if !delta_t.is_finite() || delta_t < 0.0 {
            return Err(Error::InvalidRecord(format!(
                "delta_t {delta_t} must be >= 0"
            )));
        }
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidRecord(format!("V {v} must be > 0")));
        }
        if !p.is_finite() || p < 0.0 || p > v {
            return Err(Error::InvalidRecord(format!(
                "P {p} must lie in [0, V = {v}]"
            )));
        }
        if !rf.is_finite() || rf <= 0.0 || rf > 1.0 {
            return Err(Error::InvalidRecord(format!("rf {rf} must lie in (0, 1]")));
        }
        Ok(Self { delta_t, v, p, rf })
    }
}

/// Fitted production curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveModel {
    pub family: CurveFamily,
    pub params: CurveParams,
    /// Final training MSE.
    pub loss: f64,
    pub n_records: usize,
    pub iterations: usize,
}

/// Effective slope lower bound kept by the projection step.
const MIN_EFFECTIVE_W: f64 = 1e-6;
/// Records younger than this (years) are excluded from fitting and not
/// invertible by `rf_estimate`: f near 0 makes P / (V f) explode.
const MIN_DELTA_T: f64 = 1.0;
const MAX_ITERATIONS: usize = 10_000;
const RELATIVE_LOSS_TOL: f64 = 1e-9;
const MAX_HALVINGS: usize = 40;

fn effective_w(family: CurveFamily, params: CurveParams, v: f64) -> f64 {
    match (family.depends_on_v(), params) {
        (false, CurveParams::Simple { w }) => w,
        (true, CurveParams::WithV { w0, w1 }) => w1 * v.sqrt() + w0,
        _ => panic!("curve params do not match family"),
    }
}

fn f_of(family: CurveFamily, w_eff: f64, delta_t: f64) -> f64 {
    if family.is_exponential() {
        1.0 - (-delta_t / w_eff).exp()
    } else {
        delta_t / (delta_t + w_eff)
    }
}

/// df / dW at the given effective slope.
fn df_dw(family: CurveFamily, w_eff: f64, delta_t: f64) -> f64 {
    if family.is_exponential() {
        -(-delta_t / w_eff).exp() * delta_t / (w_eff * w_eff)
    } else {
        -delta_t / ((delta_t + w_eff) * (delta_t + w_eff))
    }
}

/// Depletion fraction f(dt, V) of a fitted model.
pub fn eval_curve(model: &CurveModel, delta_t: f64, v: f64) -> Result<f64> {
    if delta_t < 0.0 {
        return Err(Error::InvalidRecord(format!(
            "delta_t {delta_t} must be >= 0"
        )));
    }
    if model.family.depends_on_v() && v <= 0.0 {
        return Err(Error::InvalidRecord(format!("V {v} must be > 0")));
    }
    let w_eff = effective_w(model.family, model.params, v);
    if w_eff <= 0.0 {
        return Err(Error::NonPositiveSlope(w_eff));
    }
    Ok(f_of(model.family, w_eff, delta_t))
}

/// Recovery-factor estimate P / (f * V), clamped into [P / V, 1].
pub fn rf_estimate(model: &CurveModel, p: f64, delta_t: f64, v: f64) -> Result<f64> {
    if delta_t < MIN_DELTA_T {
        return Err(Error::InvalidRecord(format!(
            "delta_t {delta_t} below {MIN_DELTA_T}: curve not reliably invertible"
        )));
    }
    if v <= 0.0 {
        return Err(Error::InvalidRecord(format!("V {v} must be > 0")));
    }
    let f = eval_curve(model, delta_t, v)?;
    let raw = p / (f * v);
    let lower = (p / v).min(1.0);
    Ok(raw.clamp(lower, 1.0))
}

/// Mean squared error and its gradient, in one pass over the records.
///
/// Exposed for the finite-difference checks. The gradient has one component
/// for simple families (d/dw) and two for V-dependent ones (d/dw0, d/dw1).
pub fn loss_and_gradient(
    family: CurveFamily,
    params: CurveParams,
    records: &[CurveRecord],
) -> (f64, Vec<f64>) {
    let n = records.len() as f64;
    let mut loss = 0.0;
    let mut grad = if family.depends_on_v() {
        vec![0.0, 0.0]
    } else {
        vec![0.0]
    };
    for r in records {
        let w_eff = effective_w(family, params, r.v);
        let f = f_of(family, w_eff, r.delta_t);
        let estimate = r.p / (r.v * f);
        let err = estimate - r.rf;
        loss += err * err;
        // d(estimate)/dW = -P / (V f^2) * df/dW
        let de_dw = -r.p / (r.v * f * f) * df_dw(family, w_eff, r.delta_t);
        let common = 2.0 * err * de_dw;
        if family.depends_on_v() {
            grad[0] += common; // d/dw0
            grad[1] += common * r.v.sqrt(); // d/dw1
        } else {
            grad[0] += common;
        }
    }
    loss /= n;
    for g in &mut grad {
        *g /= n;
    }
    (loss, grad)
}

fn project(
    family: CurveFamily,
    params: CurveParams,
    sqrt_v_min: f64,
    sqrt_v_max: f64,
) -> CurveParams {
    match params {
        CurveParams::Simple { w } => CurveParams::Simple {
            w: w.max(MIN_EFFECTIVE_W),
        },
        CurveParams::WithV { w0, w1 } => {
            debug_assert!(family.depends_on_v());
            // minimum of w1 * sqrt(V) + w0 over the training V range
            let min_eff = if w1 >= 0.0 {
                w1 * sqrt_v_min + w0
            } else {
                w1 * sqrt_v_max + w0
            };
            if min_eff < MIN_EFFECTIVE_W {
                CurveParams::WithV {
                    w0: w0 + (MIN_EFFECTIVE_W - min_eff),
                    w1,
                }
            } else {
                CurveParams::WithV { w0, w1 }
            }
        }
    }
}

fn step(params: CurveParams, grad: &[f64], size: f64) -> CurveParams {
    match params {
        CurveParams::Simple { w } => CurveParams::Simple {
            w: w - size * grad[0],
        },
        CurveParams::WithV { w0, w1 } => CurveParams::WithV {
            w0: w0 - size * grad[0],
            w1: w1 - size * grad[1],
        },
    }
}

/// Fits a curve by gradient descent with backtracking step halving.
///
/// Records with `delta_t` below one year are excluded; at least three usable
/// records are required. The records are sorted into a canonical order first,
/// so the fit is invariant to their input order.
pub fn fit_curve(records: &[CurveRecord], family: CurveFamily) -> Result<CurveModel> {
    let mut usable: Vec<CurveRecord> = records
        .iter()
        .filter(|r| r.delta_t >= MIN_DELTA_T)
        .copied()
        .collect();
    if usable.len() < 3 {
        return Err(Error::CurveFit(format!(
            "{} usable records (delta_t >= {MIN_DELTA_T}), need at least 3",
            usable.len()
        )));
    }
    usable.sort_unstable_by(|a, b| {
        a.delta_t
            .total_cmp(&b.delta_t)
            .then(a.v.total_cmp(&b.v))
            .then(a.p.total_cmp(&b.p))
            .then(a.rf.total_cmp(&b.rf))
    });

    let dts: Vec<f64> = usable.iter().map(|r| r.delta_t).collect();
    let sqrt_vs: Vec<f64> = usable.iter().map(|r| r.v.sqrt()).collect();
    let sqrt_v_min = sqrt_vs.iter().cloned().fold(f64::INFINITY, f64::min);
    let sqrt_v_max = sqrt_vs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut params = if family.depends_on_v() {
        CurveParams::WithV {
            w0: 0.0,
            w1: median(&dts) / median(&sqrt_vs),
        }
    } else {
        CurveParams::Simple { w: median(&dts) }
    };
    params = project(family, params, sqrt_v_min, sqrt_v_max);

    let (mut loss, mut grad) = loss_and_gradient(family, params, &usable);
    if !loss.is_finite() {
        return Err(Error::CurveFit(format!(
            "initial loss is not finite for family {}",
            family.label()
        )));
    }

    // Backtracking line search, warm-started: each iteration first tries
    // twice the previously accepted step, then halves until the loss drops.
    // Loss is monotone non-increasing by construction.
    let mut iterations = 0;
    let mut warm_step: f64 = 0.5; // first iteration tries step 1.0
    for _ in 0..MAX_ITERATIONS {
        iterations += 1;
        let mut size = (warm_step * 2.0).min(1e15);
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate = project(family, step(params, &grad, size), sqrt_v_min, sqrt_v_max);
            let (candidate_loss, candidate_grad) = loss_and_gradient(family, candidate, &usable);
            if candidate_loss.is_finite() && candidate_loss < loss {
                accepted = Some((candidate, candidate_loss, candidate_grad, size));
                break;
            }
            size /= 2.0;
        }
        let Some((next, next_loss, next_grad, accepted_size)) = accepted else {
            break; // no descent step found: converged
        };
        let relative_drop = (loss - next_loss) / loss.max(f64::MIN_POSITIVE);
        params = next;
        loss = next_loss;
        grad = next_grad;
        warm_step = accepted_size;
        if relative_drop < RELATIVE_LOSS_TOL {
            break;
        }
    }

    Ok(CurveModel {
        family,
        params,
        loss,
        n_records: usable.len(),
        iterations,
    })
}

/// Pulls training records (with their row indices) out of a dataset.
///
/// A row contributes when delta_t, V, P and the target are all present and
/// form a valid record (delta_t >= 0, V > 0, 0 <= P <= V, rf in (0, 1]).
/// Rows failing these conditions are skipped; the caller sees how many were
/// used via the returned length.
pub fn indexed_training_records(
    ds: &Dataset,
    dt_col: &str,
    v_col: &str,
    p_col: &str,
) -> Result<Vec<(usize, CurveRecord)>> {
    let dt = ds.column_index(dt_col)?;
    let v = ds.column_index(v_col)?;
    let p = ds.column_index(p_col)?;
    let mut records = Vec::new();
    for row in 0..ds.n_rows() {
        let (Some(dt), Some(v), Some(p), Some(rf_pct)) = (
            ds.cell(row, dt).as_number(),
            ds.cell(row, v).as_number(),
            ds.cell(row, p).as_number(),
            ds.target(row),
        ) else {
            continue;
        };
        if let Ok(record) = CurveRecord::new(dt, v, p, rf_pct / 100.0) {
            records.push((row, record));
        }
    }
    Ok(records)
}

/// [`indexed_training_records`] without the row indices.
pub fn training_records(
    ds: &Dataset,
    dt_col: &str,
    v_col: &str,
    p_col: &str,
) -> Result<Vec<CurveRecord>> {
    Ok(indexed_training_records(ds, dt_col, v_col, p_col)?
        .into_iter()
        .map(|(_, record)| record)
        .collect())
}

/// The three stacked feature columns appended by [`augment_features`].
pub const STACKED_COLUMNS: [&str; 3] = ["pv_ratio_pct", "rf_exp_pct", "rf_hyp_pct"];

/// Result of stacking-feature augmentation.
#[derive(Debug, Clone)]
pub struct StackAugmentation {
    pub train: Dataset,
    pub test: Dataset,
    pub exp_curve: CurveModel,
    pub hyp_curve: CurveModel,
}

/// Appends the three stacked columns computed from already-fitted curves:
/// P/V, the exponential-curve RF estimate and the hyperbolic-curve RF
/// estimate, all in percent.
///
/// Rows lacking delta_t, V or P (or with delta_t below one year, where the
/// curves are not invertible) get missing cells in all three columns.
pub fn append_stacked(
    ds: &Dataset,
    exp_curve: &CurveModel,
    hyp_curve: &CurveModel,
    dt_col: &str,
    v_col: &str,
    p_col: &str,
) -> Result<Dataset> {
    let dt_idx = ds.column_index(dt_col)?;
    let v_idx = ds.column_index(v_col)?;
    let p_idx = ds.column_index(p_col)?;
    let mut pv = Vec::with_capacity(ds.n_rows());
    let mut rf_exp = Vec::with_capacity(ds.n_rows());
    let mut rf_hyp = Vec::with_capacity(ds.n_rows());
    for row in 0..ds.n_rows() {
        let cells = (
            ds.cell(row, dt_idx).as_number(),
            ds.cell(row, v_idx).as_number(),
            ds.cell(row, p_idx).as_number(),
        );
        match cells {
            (Some(dt), Some(v), Some(p)) if dt >= MIN_DELTA_T && v > 0.0 && p >= 0.0 => {
                pv.push(Some(p / v * 100.0));
                rf_exp.push(Some(rf_estimate(exp_curve, p, dt, v)? * 100.0));
                rf_hyp.push(Some(rf_estimate(hyp_curve, p, dt, v)? * 100.0));
            }
            _ => {
                pv.push(None);
                rf_exp.push(None);
                rf_hyp.push(None);
            }
        }
    }
    let ds = ds.append_numeric_column(STACKED_COLUMNS[0], "%", &pv)?;
    let ds = ds.append_numeric_column(STACKED_COLUMNS[1], "%", &rf_exp)?;
    ds.append_numeric_column(STACKED_COLUMNS[2], "%", &rf_hyp)
}

/// Fits exp_V and hyp_V curves on the training set only and appends the
/// stacked columns to both datasets.
pub fn augment_features(
    train: &Dataset,
    test: &Dataset,
    dt_col: &str,
    v_col: &str,
    p_col: &str,
) -> Result<StackAugmentation> {
    let records = training_records(train, dt_col, v_col, p_col)?;
    let exp_curve = fit_curve(&records, CurveFamily::ExpV)
        .map_err(|e| Error::CurveFit(format!("stacking exp_v fit: {e}")))?;
    let hyp_curve = fit_curve(&records, CurveFamily::HypV)
        .map_err(|e| Error::CurveFit(format!("stacking hyp_v fit: {e}")))?;
    Ok(StackAugmentation {
        train: append_stacked(train, &exp_curve, &hyp_curve, dt_col, v_col, p_col)?,
        test: append_stacked(test, &exp_curve, &hyp_curve, dt_col, v_col, p_col)?,
        exp_curve,
        hyp_curve,
    })
}
