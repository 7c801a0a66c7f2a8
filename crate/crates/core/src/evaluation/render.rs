//! Chlorophyll map rendering: binary PPM (P6) with a perceptual color ramp.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::GeoGrid;

/// How grid values map onto the color ramp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapScale {
    /// `t = (log10 v − log10 lo) / (log10 hi − log10 lo)`; standard for
    /// chlorophyll, which is roughly log-normal.
    Log10,
    /// `t = (v − lo) / (hi − lo)`.
    Linear,
}

impl FromStr for MapScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log10" => Ok(MapScale::Log10),
            "linear" => Ok(MapScale::Linear),
            other => Err(Error::Argument(format!(
                "unknown scale {other:?}; expected log10 or linear"
            ))),
        }
    }
}

impl std::fmt::Display for MapScale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MapScale::Log10 => "log10",
            MapScale::Linear => "linear",
        })
    }
}

/// Color of missing pixels: a neutral gray no ramp entry uses.
pub const FILL_COLOR: [u8; 3] = [128, 128, 128];

/// Anchor colors of the ramp at t = 0, 1/8, …, 1 (dark violet through
/// green to bright yellow; perceptually ordered and colorblind-safe).
const RAMP_ANCHORS: [[f64; 3]; 9] = [
    [68.0, 1.0, 84.0],
    [71.0, 44.0, 122.0],
    [59.0, 81.0, 139.0],
    [44.0, 113.0, 142.0],
    [33.0, 144.0, 141.0],
    [39.0, 173.0, 129.0],
    [92.0, 200.0, 99.0],
    [170.0, 220.0, 50.0],
    [253.0, 231.0, 37.0],
];

/// Ramp color for `t` in `[0, 1]` (values outside are clamped), by linear
/// interpolation between the anchors.
pub fn ramp(t: f64) -> [u8; 3] {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let pos = t * (RAMP_ANCHORS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(RAMP_ANCHORS.len() - 2);
    let f = pos - i as f64;
    let mut rgb = [0u8; 3];
    for c in 0..3 {
        let v = RAMP_ANCHORS[i][c] + f * (RAMP_ANCHORS[i + 1][c] - RAMP_ANCHORS[i][c]);
        rgb[c] = v.round().clamp(0.0, 255.0) as u8;
    }
    rgb
}

/// Render a grid as an 8-bit binary PPM (P6) image, one pixel per cell.
///
/// Present values are clamped to `[lo, hi]`, mapped to `[0, 1]` under the
/// chosen scale, and colored by [`ramp`]; fill pixels get [`FILL_COLOR`].
/// Rows run north to south, columns west to east, matching grid storage.
pub fn render_map(grid: &GeoGrid, lo: f64, hi: f64, scale: MapScale) -> Result<Vec<u8>> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::Argument(format!(
            "map range must satisfy lo < hi with both finite, got {lo}..{hi}"
        )));
    }
    if scale == MapScale::Log10 && lo <= 0.0 {
        return Err(Error::Argument(format!(
            "log10 scale requires lo > 0, got {lo}"
        )));
    }
    let header = format!("P6\n{} {}\n255\n", grid.n_cols, grid.n_rows);
    let mut bytes = Vec::with_capacity(header.len() + 3 * grid.len());
    bytes.extend_from_slice(header.as_bytes());
    let (den_lo, den_hi) = match scale {
        MapScale::Log10 => (lo.log10(), hi.log10()),
        MapScale::Linear => (lo, hi),
    };
    for idx in 0..grid.len() {
        let rgb = if grid.is_present(idx) {
            let v = grid.values[idx].clamp(lo, hi);
            let t = match scale {
                MapScale::Log10 => (v.log10() - den_lo) / (den_hi - den_lo),
                MapScale::Linear => (v - den_lo) / (den_hi - den_lo),
            };
            ramp(t)
        } else {
            FILL_COLOR
        };
        bytes.extend_from_slice(&rgb);
    }
    Ok(bytes)
}
