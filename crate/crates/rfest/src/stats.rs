//! Order-canonical scalar statistics.
//!
//! Aggregates over multisets of values (leaf means, per-category means, node
//! SSE) sort the values before summing. The result is then a pure function
//! of the multiset: permuting dataset rows cannot change any fitted artifact,
//! which the reproducibility tests assert bit-exactly.

/// Sum in ascending value order.
pub(crate) fn sorted_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v.iter().sum()
}

/// Mean in ascending value order. Returns 0 for an empty slice.
pub(crate) fn sorted_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    sorted_sum(values) / values.len() as f64
}

/// Two-pass sum of squared deviations from the mean, in ascending value order.
pub(crate) fn sorted_sse(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mean = sorted_mean(values);
    let mut devs: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    devs.sort_unstable_by(f64::total_cmp);
    devs.iter().sum()
}

/// Median of the values (mean of the two middle order statistics when even).
pub(crate) fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Linear-interpolation percentile of sorted order statistics, p in [0, 1].
pub(crate) fn percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty slice");
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    if v.len() == 1 {
        return v[0];
    }
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    v[lo] + (v[hi] - v[lo]) * frac
}
