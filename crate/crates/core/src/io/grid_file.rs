//! `OCGRID` binary grid container.
//!
//! Layout, in order:
//!
//! | bytes            | content                                            |
//! |------------------|----------------------------------------------------|
//! | 0..7             | magic `OCGRID\0`                                   |
//! | 7                | format version, currently `0x01`                   |
//! | 8..12            | `header_len`: u32, little-endian                   |
//! | 12..12+header_len| JSON header (UTF-8)                                |
//! | rest             | one float32 little-endian plane per band name      |
//!
//! The JSON header carries `n_rows`, `n_cols`, `lat_north`, `lat_south`,
//! `lon_west`, `lon_east`, `band_names`, `fill_value`, `time_start` and
//! `time_end`. Planes appear in `band_names` order, each `n_rows * n_cols`
//! float32 values in row-major north-to-south / west-to-east scan order. A
//! chlorophyll plane, when present, is listed last under the name `chl`.
//! `fill_value` is `null` in JSON when the sentinel is NaN (JSON has no NaN
//! literal); `time_start`/`time_end` are ISO-8601 strings or `null`.
//!
//! The declared payload size must match the file length exactly; truncated or
//! padded files are rejected with a length error before any plane is read.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GeoGrid, GridStack};

const MAGIC: &[u8; 7] = b"OCGRID\0";
const VERSION: u8 = 1;
/// Name of the chlorophyll plane in `band_names`.
pub const CHL_PLANE: &str = "chl";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridHeader {
    n_rows: u64,
    n_cols: u64,
    lat_north: f64,
    lat_south: f64,
    lon_west: f64,
    lon_east: f64,
    band_names: Vec<String>,
    /// `null` encodes a NaN sentinel.
    fill_value: Option<f64>,
    time_start: Option<String>,
    time_end: Option<String>,
}

/// Serialize a stack to container bytes.
pub fn encode_grid(stack: &GridStack) -> Result<Vec<u8>> {
    let geometry = stack.geometry();
    let mut band_names: Vec<String> = stack.bands.iter().map(|(n, _)| n.clone()).collect();
    if band_names.iter().any(|n| n == CHL_PLANE) {
        return Err(Error::Schema(format!(
            "reflectance planes may not be named {CHL_PLANE}; that name is reserved for the target plane"
        )));
    }
    if stack.chl.is_some() {
        band_names.push(CHL_PLANE.to_string());
    }
    let header = GridHeader {
        n_rows: geometry.n_rows as u64,
        n_cols: geometry.n_cols as u64,
        lat_north: geometry.lat_north,
        lat_south: geometry.lat_south,
        lon_west: geometry.lon_west,
        lon_east: geometry.lon_east,
        band_names,
        fill_value: if geometry.fill_value.is_nan() {
            None
        } else {
            Some(geometry.fill_value)
        },
        time_start: stack.time_start.clone(),
        time_end: stack.time_end.clone(),
    };
    let header_bytes =
        serde_json::to_vec(&header).map_err(|e| Error::Format(format!("grid header: {e}")))?;
    let header_len = u32::try_from(header_bytes.len())
        .map_err(|_| Error::Length("grid header exceeds u32 length".into()))?;

    let mut out = Vec::with_capacity(12 + header_bytes.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&header_bytes);
    let planes = stack.bands.iter().map(|(_, g)| g).chain(stack.chl.iter());
    for plane in planes {
        for &v in &plane.values {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

/// Parse container bytes into a stack.
pub fn decode_grid(bytes: &[u8]) -> Result<GridStack> {
    if bytes.len() < 12 {
        return Err(Error::Length(format!(
            "grid file too short for magic and header length ({} bytes)",
            bytes.len()
        )));
    }
    if &bytes[..7] != MAGIC {
        return Err(Error::Format("bad magic; not an OCGRID file".into()));
    }
    if bytes[7] != VERSION {
        return Err(Error::Version(format!(
            "unsupported OCGRID version {}, expected {VERSION}",
            bytes[7]
        )));
    }
    let header_len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let payload_start = 12usize
        .checked_add(header_len)
        .ok_or_else(|| Error::Length("header length overflows".into()))?;
    if payload_start > bytes.len() {
        return Err(Error::Length(format!(
            "declared header length {header_len} exceeds file size {}",
            bytes.len()
        )));
    }
    let header_value: serde_json::Value = serde_json::from_slice(&bytes[12..payload_start])
        .map_err(|e| Error::Parse(format!("grid header is not valid JSON: {e}")))?;
    let header: GridHeader = serde_json::from_value(header_value)
        .map_err(|e| Error::Schema(format!("grid header: {e}")))?;

    let n_rows = usize::try_from(header.n_rows)
        .map_err(|_| Error::Length("n_rows does not fit this platform".into()))?;
    let n_cols = usize::try_from(header.n_cols)
        .map_err(|_| Error::Length("n_cols does not fit this platform".into()))?;
    let n_bands = header.band_names.len();
    let plane_px = (n_rows as u128) * (n_cols as u128);
    let expected = (plane_px * n_bands as u128)
        .checked_mul(4)
        .and_then(|p| p.checked_add(payload_start as u128));
    match expected {
        Some(total) if total == bytes.len() as u128 => {}
        _ => {
            return Err(Error::Length(format!(
                "file length {} does not match {} declared plane(s) of {}x{} float32",
                bytes.len(),
                n_bands,
                n_rows,
                n_cols
            )));
        }
    }
    if n_bands == 0 {
        return Err(Error::Schema("grid file declares no planes".into()));
    }
    for (i, name) in header.band_names.iter().enumerate() {
        if name == CHL_PLANE && i + 1 != n_bands {
            return Err(Error::Schema(format!(
                "plane {CHL_PLANE} must be listed last, found at position {i}"
            )));
        }
    }

    let fill_value = header.fill_value.unwrap_or(f64::NAN);
    let plane_len = n_rows * n_cols;
    let mut planes = Vec::with_capacity(n_bands);
    for b in 0..n_bands {
        let start = payload_start + b * plane_len * 4;
        let mut values = Vec::with_capacity(plane_len);
        for px in 0..plane_len {
            let at = start + px * 4;
            let raw: [u8; 4] = bytes[at..at + 4].try_into().expect("4 bytes");
            values.push(f32::from_le_bytes(raw) as f64);
        }
        planes.push(GeoGrid::new(
            n_rows,
            n_cols,
            header.lat_north,
            header.lat_south,
            header.lon_west,
            header.lon_east,
            fill_value,
            values,
        )?);
    }

    let mut chl = None;
    let mut bands = Vec::with_capacity(n_bands);
    for (name, plane) in header.band_names.iter().zip(planes) {
        if name == CHL_PLANE {
            chl = Some(plane);
        } else {
            bands.push((name.clone(), plane));
        }
    }
    GridStack::new(bands, chl, header.time_start, header.time_end)
}

/// Write a stack to `path` in container format.
pub fn write_grid(path: &Path, stack: &GridStack) -> Result<()> {
    std::fs::write(path, encode_grid(stack)?)?;
    Ok(())
}

/// Read a stack from `path`.
pub fn read_grid(path: &Path) -> Result<GridStack> {
    decode_grid(&std::fs::read(path)?)
}
