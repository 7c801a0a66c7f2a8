//! Grid-level evaluation operations: multi-day compositing and
//! prediction-vs-truth error maps.

use crate::error::{Error, Result};
use crate::grid::GeoGrid;

/// Truth below this is too close to zero to normalize an error by.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

/// A composited grid plus how many inputs contributed to each pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    pub grid: GeoGrid,
    /// Per-pixel contribution count, row-major like the grid values.
    pub counts: Vec<u32>,
}

/// Average a list of grids pixel by pixel, ignoring fill.
///
/// A pixel's composite value is the mean over the grids where that pixel is
/// present; pixels missing everywhere stay fill (count 0). The per-pixel
/// contributions are summed in value order, which makes the result exactly
/// independent of the order the grids are passed in.
pub fn composite_average(grids: &[GeoGrid]) -> Result<Composite> {
    let first = grids
        .first()
        .ok_or_else(|| Error::Argument("composite of zero grids is undefined".into()))?;
    for (i, g) in grids.iter().enumerate().skip(1) {
        first.check_same_geometry(g, &format!("composite input {i}"))?;
    }
    let mut out = first.filled_like();
    let mut counts = vec![0u32; out.len()];
    let mut bucket: Vec<f64> = Vec::with_capacity(grids.len());
    // One pixel index runs across every input grid plus the two outputs.
    #[allow(clippy::needless_range_loop)]
    for idx in 0..out.len() {
        bucket.clear();
        for g in grids {
            if g.is_present(idx) {
                bucket.push(g.values[idx]);
            }
        }
        if bucket.is_empty() {
            continue;
        }
        bucket.sort_by(|a, b| a.partial_cmp(b).expect("present pixels are finite"));
        let sum: f64 = bucket.iter().sum();
        out.values[idx] = sum / bucket.len() as f64;
        counts[idx] = bucket.len() as u32;
    }
    Ok(Composite { grid: out, counts })
}

/// Signed relative error `(pred − truth)/truth` per pixel.
///
/// Pixels where either side is missing, or where truth is below
/// [`RELATIVE_ERROR_FLOOR`], come out as fill.
pub fn relative_error_grid(pred: &GeoGrid, truth: &GeoGrid) -> Result<GeoGrid> {
    pred.check_same_geometry(truth, "truth grid")?;
    let mut out = pred.filled_like();
    for idx in 0..out.len() {
        if !pred.is_present(idx) || !truth.is_present(idx) {
            continue;
        }
        let t = truth.values[idx];
        if t < RELATIVE_ERROR_FLOOR {
            continue;
        }
        out.values[idx] = (pred.values[idx] - t) / t;
    }
    Ok(out)
}
