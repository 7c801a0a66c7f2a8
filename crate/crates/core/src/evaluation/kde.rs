//! Gaussian kernel density estimation with Silverman's bandwidth rule.

use crate::error::{Error, Result};

/// `1/√(2π)`, the standard normal density at zero.
const INV_SQRT_2PI: f64 = 0.398942280401432677939946059934381868;

/// A density estimate evaluated on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    /// Evaluation grid, ascending (mg/m³).
    pub xs: Vec<f64>,
    /// Density at each grid point (per mg/m³); non-negative.
    pub ys: Vec<f64>,
    /// Kernel bandwidth used (mg/m³).
    pub bandwidth: f64,
    /// Number of samples behind the estimate.
    pub n: usize,
}

/// Silverman's rule of thumb: `0.9·min(sd, IQR/1.34)·N^(−1/5)`.
///
/// `sd` is the population standard deviation; the interquartile range uses
/// linear-interpolation quantiles on the sorted values. Data whose spread
/// measure is zero (constant values, or a zero IQR with sd dominating it)
/// have no usable bandwidth and are a domain error.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Argument(format!(
            "bandwidth selection needs at least 2 values, got {n}"
        )));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Argument(format!(
            "bandwidth selection requires finite values, found {bad}"
        )));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / nf;
    let sd = var.sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let quantile = |p: f64| {
        let pos = (nf - 1.0) * p;
        let lo = pos.floor() as usize;
        let frac = pos - lo as f64;
        if frac == 0.0 || lo + 1 >= n {
            sorted[lo]
        } else {
            sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
        }
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let spread = sd.min(iqr / 1.34);
    if spread <= 0.0 {
        return Err(Error::Domain(
            "data spread is zero; kernel bandwidth is degenerate".into(),
        ));
    }
    Ok(0.9 * spread * nf.powf(-0.2))
}

/// Evaluate the Gaussian KDE `f(x) = (1/(N·h))·Σ φ((x−vᵢ)/h)` on `xs`.
///
/// `xs` must be non-decreasing; the bandwidth must be positive.
pub fn kde_density(values: &[f64], bandwidth: f64, xs: &[f64]) -> Result<DensityCurve> {
    if bandwidth <= 0.0 || !bandwidth.is_finite() {
        return Err(Error::Argument(format!(
            "bandwidth must be positive and finite, got {bandwidth}"
        )));
    }
    if values.is_empty() {
        return Err(Error::Argument(
            "density of an empty sample is undefined".into(),
        ));
    }
    if xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Argument(
            "evaluation grid must be sorted ascending".into(),
        ));
    }
    let n = values.len();
    let norm = 1.0 / (n as f64 * bandwidth);
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let sum: f64 = values
                .iter()
                .map(|&v| {
                    let u = (x - v) / bandwidth;
                    INV_SQRT_2PI * (-0.5 * u * u).exp()
                })
                .sum();
            norm * sum
        })
        .collect();
    Ok(DensityCurve {
        xs: xs.to_vec(),
        ys,
        bandwidth,
        n,
    })
}

/// An ascending `points`-point grid over `[lo, hi]` inclusive.
pub fn grid_between(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::Argument(format!(
            "evaluation grid needs at least 2 points, got {points}"
        )));
    }
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Argument(format!(
            "evaluation grid needs finite lo < hi, got {lo}..{hi}"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| lo + i as f64 * step).collect())
}

/// An ascending `points`-point grid spanning `[min−6h, max+6h]`, wide enough
/// to capture essentially all of the density mass.
pub fn default_grid(values: &[f64], bandwidth: f64, points: usize) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Argument(
            "cannot build a grid over an empty sample".into(),
        ));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    grid_between(lo - 6.0 * bandwidth, hi + 6.0 * bandwidth, points)
}

impl DensityCurve {
    /// CSV form: header `x,density`, shortest-round-trip numbers, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,density\n");
        for (x, y) in self.xs.iter().zip(&self.ys) {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }

    /// Trapezoid-rule integral of the curve over its grid.
    pub fn integral(&self) -> f64 {
        let mut acc = 0.0;
        for w in self.xs.windows(2).zip(self.ys.windows(2)) {
            let (xs, ys) = w;
            acc += 0.5 * (ys[0] + ys[1]) * (xs[1] - xs[0]);
        }
        acc
    }
}
