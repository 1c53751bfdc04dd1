//! Minimal SVG plot emission. Plots are views of the CSV data, never the
//! source of truth.

use std::path::Path;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn document(body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

struct Scale {
    min: f64,
    max: f64,
    lo: f64,
    hi: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, lo: f64, hi: f64) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            if v.is_finite() {
                min = min.min(v);
                max = max.max(v);
            }
        }
        if !min.is_finite() || max <= min {
            min = 0.0;
            max = 1.0;
        }
        Self { min, max, lo, hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.lo + (v - self.min) / (self.max - self.min) * (self.hi - self.lo)
    }
}

/// Interval fan: rows sorted by true value, intervals as vertical segments.
pub fn interval_fan(
    points: &[(f64, f64, f64, f64)],
    alpha: f64,
    path: &Path,
) -> anyhow::Result<()> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ys = sorted
        .iter()
        .flat_map(|&(t, p, l, u)| [t, p, l, u])
        .filter(|v| v.is_finite());
    let y_scale = Scale::new(ys, HEIGHT - MARGIN, MARGIN);
    let x_scale = Scale::new(
        [0.0, sorted.len().max(1) as f64 - 1.0].into_iter(),
        MARGIN,
        WIDTH - MARGIN,
    );

    let mut body = String::new();
    for (i, &(y_true, y_hat, lower, upper)) in sorted.iter().enumerate() {
        let x = x_scale.map(i as f64);
        body.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#9ecae1\" stroke-width=\"1.5\"/>\n",
            y_scale.map(lower.max(y_scale.min)),
            y_scale.map(upper.min(y_scale.max)),
        ));
        body.push_str(&format!(
            "<circle cx=\"{x:.1}\" cy=\"{:.1}\" r=\"2\" fill=\"#1f77b4\"/>\n",
            y_scale.map(y_hat)
        ));
        body.push_str(&format!(
            "<circle cx=\"{x:.1}\" cy=\"{:.1}\" r=\"2\" fill=\"#d62728\"/>\n",
            y_scale.map(y_true)
        ));
    }
    body.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"25\" font-family=\"sans-serif\" font-size=\"14\">prediction intervals, alpha = {alpha}</text>\n"
    ));
    std::fs::write(path, document(&body))?;
    Ok(())
}

/// Horizontal bars of split-count feature importance.
pub fn importance_bars(pairs: &[(String, u64)], path: &Path) -> anyhow::Result<()> {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    sorted.truncate(20);
    let max = sorted.first().map_or(1, |p| p.1).max(1) as f64;
    let bar_h = (HEIGHT - 2.0 * MARGIN) / sorted.len().max(1) as f64;

    let mut body = String::new();
    for (i, (name, count)) in sorted.iter().enumerate() {
        let y = MARGIN + i as f64 * bar_h;
        let w = (*count as f64 / max) * (WIDTH - 2.0 * MARGIN - 150.0);
        body.push_str(&format!(
            "<rect x=\"200\" y=\"{:.1}\" width=\"{w:.1}\" height=\"{:.1}\" fill=\"#1f77b4\"/>\n",
            y,
            (bar_h - 4.0).max(1.0)
        ));
        body.push_str(&format!(
            "<text x=\"195\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{name}</text>\n",
            y + bar_h / 2.0
        ));
        body.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{count}</text>\n",
            205.0 + w,
            y + bar_h / 2.0
        ));
    }
    body.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"25\" font-family=\"sans-serif\" font-size=\"14\">feature importance (split count)</text>\n"
    ));
    std::fs::write(path, document(&body))?;
    Ok(())
}

/// Embedding scatter colored by cluster.
pub fn scatter(points: &[(f64, f64, usize)], path: &Path) -> anyhow::Result<()> {
    let x_scale = Scale::new(points.iter().map(|p| p.0), MARGIN, WIDTH - MARGIN);
    let y_scale = Scale::new(points.iter().map(|p| p.1), HEIGHT - MARGIN, MARGIN);
    let mut body = String::new();
    for &(x, y, cluster) in points {
        body.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{}\"/>\n",
            x_scale.map(x),
            y_scale.map(y),
            PALETTE[cluster % PALETTE.len()]
        ));
    }
    body.push_str(&format!(
        "<text x=\"{MARGIN}\" y=\"25\" font-family=\"sans-serif\" font-size=\"14\">t-SNE embedding by cluster</text>\n"
    ));
    std::fs::write(path, document(&body))?;
    Ok(())
}
