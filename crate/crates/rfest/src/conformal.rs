//! Inductive conformal prediction over gradient boosting.
//!
//! The training data is split once into a proper training set and a
//! calibration set. The boosting model is fit on the proper part; the
//! calibration rows yield sorted absolute-residual nonconformity scores.
//! The interval half-width at confidence alpha is the ceil(alpha * (n+1))-th
//! smallest score — the conservative rank rule, which keeps the finite-sample
//! validity guarantee under exchangeability even for tiny calibration sets.
//! Intervals are symmetric around the point prediction, so their width is
//! constant across query points for a fixed model and alpha.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::ensembles::{fit_gbm, GbmModel, GbmParams};
use crate::error::{Error, Result};
use crate::eval::PredictionInterval;
use crate::seeding::stream_rng;
use crate::tabular::FeatureMatrix;

/// Absolute-residual nonconformity score |y - y_hat|.
pub fn nonconformity(y: f64, y_hat: f64) -> f64 {
    (y - y_hat).abs()
}

/// Boosting model plus its sorted calibration scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcpModel {
    pub gbm: GbmModel,
    /// Calibration nonconformity scores, ascending, stored verbatim.
    pub scores: Vec<f64>,
    pub n_cal: usize,
    pub split_ratio: f64,
    pub split_seed: u64,
}

/// Fits the conformal wrapper: random disjoint proper-train / calibration
/// split, boosting on the proper part, scores on the calibration part.
pub fn fit_icp(
    x: &FeatureMatrix,
    y: &[f64],
    gbm_params: &GbmParams,
    split_ratio: f64,
    seed: u64,
) -> Result<IcpModel> {
    let n = x.n_rows();
    if n < 4 {
        return Err(Error::TooFewRows {
            n,
            reason: "conformal split needs at least 4 rows".to_string(),
        });
    }
    if y.len() != n {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: n,
        });
    }
    if !(0.0 < split_ratio && split_ratio < 1.0) {
        return Err(Error::DegenerateSplit(format!(
            "split ratio {split_ratio} outside (0, 1)"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, 0));
    let n_train = ((split_ratio * n as f64).floor() as usize).clamp(2, n - 1);
    let (train_rows, cal_rows) = order.split_at(n_train);
    if cal_rows.is_empty() {
        return Err(Error::DegenerateSplit(format!(
            "no calibration rows left from n = {n} at ratio {split_ratio}"
        )));
    }

    let x_train = x.select_rows(train_rows);
    let y_train: Vec<f64> = train_rows.iter().map(|&r| y[r]).collect();
    let gbm = fit_gbm(&x_train, &y_train, gbm_params, seed)?;

    let mut scores: Vec<f64> = cal_rows
        .iter()
        .map(|&r| Ok(nonconformity(y[r], gbm.predict(x.row(r))?)))
        .collect::<Result<_>>()?;
    scores.sort_unstable_by(f64::total_cmp);

    Ok(IcpModel {
        gbm,
        n_cal: scores.len(),
        scores,
        split_ratio,
        split_seed: seed,
    })
}

impl IcpModel {
    /// Interval half-width at confidence `alpha`.
    ///
    /// Rank ceil(alpha * (n_cal + 1)); when the rank exceeds the calibration
    /// size the half-width is infinite and the reported interval clamps to
    /// the whole target range.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        // Guard the ceil against roundoff when alpha*(n+1) lands on an integer.
        let rank = ((alpha * (self.n_cal + 1) as f64) - 1e-9).ceil().max(1.0) as usize;
        if rank > self.n_cal {
            Ok(f64::INFINITY)
        } else {
            Ok(self.scores[rank - 1])
        }
    }

    /// Symmetric interval around the boosted point prediction.
    pub fn interval(&self, row: &[f64], alpha: f64) -> Result<PredictionInterval> {
        let q = self.quantile(alpha)?;
        let center = self.gbm.predict(row)?;
        Ok(PredictionInterval {
            lower: center - q,
            upper: center + q,
            alpha,
        })
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        self.gbm.predict(row)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data(n: usize) -> (FeatureMatrix, Vec<f64>) {
        let x = FeatureMatrix::from_rows((0..n).map(|i| vec![i as f64]).collect());
        let y: Vec<f64> = (0..n).map(|i| 10.0 + (i % 7) as f64 * 3.0).collect();
        (x, y)
    }

    fn quick_params() -> GbmParams {
        GbmParams {
            n_stages: 10,
            shrinkage: 0.5,
            max_depth: Some(2),
            min_samples_leaf: 1,
        }
    }

    #[test]
    fn nonconformity_is_absolute_and_symmetric() {
        assert_eq!(nonconformity(35.0, 30.0), 5.0);
        assert_eq!(nonconformity(30.0, 30.0), 0.0);
        assert_eq!(nonconformity(2.0, 9.0), nonconformity(9.0, 2.0));
    }

    #[test]
    fn split_sizes_follow_the_ratio() {
        let (x, y) = line_data(10);
        let model = fit_icp(&x, &y, &quick_params(), 0.8, 7).unwrap();
        assert_eq!(model.n_cal, 2);
        assert_eq!(model.scores.len(), 2);
    }

    #[test]
    fn perfect_fit_gives_zero_width() {
        // constant target: the boosting model is exact, all scores are 0
        let x = FeatureMatrix::from_rows((0..12).map(|i| vec![i as f64]).collect());
        let y = vec![25.0; 12];
        let model = fit_icp(&x, &y, &quick_params(), 0.75, 3).unwrap();
        assert!(model.scores.iter().all(|&s| s == 0.0));
        let interval = model.interval(&[4.0], 0.5).unwrap();
        assert_eq!(interval.lower, interval.upper);
    }

    #[test]
    fn deterministic_in_seed() {
        let (x, y) = line_data(40);
        let a = fit_icp(&x, &y, &quick_params(), 0.75, 9).unwrap();
        let b = fit_icp(&x, &y, &quick_params(), 0.75, 9).unwrap();
        assert_eq!(a.scores, b.scores);
        let c = fit_icp(&x, &y, &quick_params(), 0.75, 10).unwrap();
        assert_ne!(a.scores, c.scores);
    }

    #[test]
    fn quantile_rank_arithmetic() {
        let (x, y) = line_data(8);
        let mut model = fit_icp(&x, &y, &quick_params(), 0.75, 1).unwrap();
        // overwrite with a transparent score set
        model.scores = (1..=100).map(f64::from).collect();
        model.n_cal = 100;
        // ceil(0.9 * 101) = 91
        assert_eq!(model.quantile(0.9).unwrap(), 91.0);
        // integer product must not round up: ceil(0.5 * 101) = 51
        assert_eq!(model.quantile(0.5).unwrap(), 51.0);

        // a single score cannot support alpha = 0.9: index 2 > 1
        model.scores = vec![5.0];
        model.n_cal = 1;
        assert!(model.quantile(0.9).unwrap().is_infinite());
        assert_eq!(model.quantile(0.4).unwrap(), 5.0);
        assert!(model.quantile(1.0).is_err());
        assert!(model.quantile(0.0).is_err());
    }

    #[test]
    fn quantile_is_monotone_in_alpha() {
        let (x, y) = line_data(60);
        let model = fit_icp(&x, &y, &quick_params(), 0.7, 5).unwrap();
        let mut last = 0.0;
        for alpha in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            let q = model.quantile(alpha).unwrap();
            assert!(q >= last);
            last = q;
        }
    }

    #[test]
    fn intervals_are_symmetric_constant_width_and_nested() {
        let (x, y) = line_data(60);
        let model = fit_icp(&x, &y, &quick_params(), 0.75, 2).unwrap();
        let q8 = model.quantile(0.8).unwrap();
        let mut widths = Vec::new();
        for probe in [0.0, 10.0, 33.3, 59.0] {
            let i8 = model.interval(&[probe], 0.8).unwrap();
            let i9 = model.interval(&[probe], 0.9).unwrap();
            let center = model.predict(&[probe]).unwrap();
            assert!((i8.upper - center - (center - i8.lower)).abs() < 1e-9);
            assert!((i8.width() - 2.0 * q8).abs() < 1e-9);
            assert!(i9.lower <= i8.lower && i8.upper <= i9.upper);
            widths.push(i8.width());
        }
        // absolute-residual ICP: width does not depend on x
        assert!(widths.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn hand_built_interval_example() {
        let (x, y) = line_data(8);
        let mut model = fit_icp(&x, &y, &quick_params(), 0.75, 1).unwrap();
        model.scores = vec![10.0];
        model.n_cal = 1;
        let center = model.predict(&[3.0]).unwrap();
        let interval = model.interval(&[3.0], 0.4).unwrap();
        assert_eq!(interval.lower, center - 10.0);
        assert_eq!(interval.upper, center + 10.0);
    }

    #[test]
    fn degenerate_inputs_error() {
        let (x, y) = line_data(3);
        assert!(fit_icp(&x, &y, &quick_params(), 0.75, 0).is_err());
        let (x, y) = line_data(10);
        assert!(fit_icp(&x, &y, &quick_params(), 0.0, 0).is_err());
        assert!(fit_icp(&x, &y, &quick_params(), 1.0, 0).is_err());
    }
}
