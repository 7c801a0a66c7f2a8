//! Georeferenced raster grids and stacks of band planes.
//!
//! A [`GeoGrid`] is one row-major plane of float values over a regular
//! lat/lon box, scanned north-to-south / west-to-east (row 0 is the northern
//! edge, column 0 the western edge). Values equal to the grid's fill value
//! mark missing pixels. A [`GridStack`] bundles the six reflectance planes
//! (and optionally a chlorophyll plane) sharing one geometry and time window.
//!
//! In-memory values are `f64`; the on-disk container stores float32 planes
//! (see [`crate::io::grid_file`]).

use crate::error::{Error, Result};
use crate::sample::{Sample, SampleTable, BAND_NAMES, N_BANDS};

/// Default fill value for missing pixels.
pub const DEFAULT_FILL: f64 = -999.0;

/// One row-major raster plane over a lat/lon box.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoGrid {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Latitude of the northern edge, degrees north.
    pub lat_north: f64,
    /// Latitude of the southern edge, degrees north.
    pub lat_south: f64,
    /// Longitude of the western edge, degrees east.
    pub lon_west: f64,
    /// Longitude of the eastern edge, degrees east.
    pub lon_east: f64,
    /// Sentinel marking missing pixels (may be NaN).
    pub fill_value: f64,
    /// `n_rows * n_cols` values, row-major, north-to-south / west-to-east.
    pub values: Vec<f64>,
}

impl GeoGrid {
    /// Build a grid, validating shape and georeferencing.
    #[allow(clippy::too_many_arguments)] // dims, four corners, fill, values
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        lat_north: f64,
        lat_south: f64,
        lon_west: f64,
        lon_east: f64,
        fill_value: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Argument(
                "grid must have at least one row and column".into(),
            ));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::Dimension(format!(
                "grid declares {n_rows} x {n_cols} = {} pixels but holds {} values",
                n_rows * n_cols,
                values.len()
            )));
        }
        let corners = [
            ("lat_north", lat_north),
            ("lat_south", lat_south),
            ("lon_west", lon_west),
            ("lon_east", lon_east),
        ];
        if let Some((name, value)) = corners.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Argument(format!(
                "{name} must be finite, got {value}"
            )));
        }
        if lat_north <= lat_south {
            return Err(Error::Argument(format!(
                "lat_north ({lat_north}) must be greater than lat_south ({lat_south})"
            )));
        }
        if lon_west >= lon_east {
            return Err(Error::Argument(format!(
                "lon_west ({lon_west}) must be less than lon_east ({lon_east})"
            )));
        }
        Ok(GeoGrid {
            n_rows,
            n_cols,
            lat_north,
            lat_south,
            lon_west,
            lon_east,
            fill_value,
            values,
        })
    }

    /// Grid with the same geometry as `self`, every pixel set to fill.
    pub fn filled_like(&self) -> GeoGrid {
        GeoGrid {
            values: vec![self.fill_value; self.values.len()],
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when `v` is this grid's fill sentinel (NaN-aware).
    pub fn is_fill(&self, v: f64) -> bool {
        v == self.fill_value || (v.is_nan() && self.fill_value.is_nan())
    }

    /// True when the pixel holds usable data: not fill and finite.
    pub fn is_present(&self, idx: usize) -> bool {
        let v = self.values[idx];
        !self.is_fill(v) && v.is_finite()
    }

    /// Check that `other` has identical shape and georeferencing.
    pub fn check_same_geometry(&self, other: &GeoGrid, what: &str) -> Result<()> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::Dimension(format!(
                "{what}: shapes differ ({}x{} vs {}x{})",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let geo = |g: &GeoGrid| (g.lat_north, g.lat_south, g.lon_west, g.lon_east);
        if geo(self) != geo(other) {
            return Err(Error::Dimension(format!(
                "{what}: georeferencing differs ({:?} vs {:?})",
                geo(self),
                geo(other)
            )));
        }
        Ok(())
    }
}

/// Six reflectance planes plus an optional chlorophyll plane on one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct GridStack {
    /// Reflectance planes as (label, plane), in storage order.
    pub bands: Vec<(String, GeoGrid)>,
    /// Chlorophyll plane, when the stack carries one.
    pub chl: Option<GeoGrid>,
    /// Start of the observation window (ISO-8601), if known.
    pub time_start: Option<String>,
    /// End of the observation window (ISO-8601), if known.
    pub time_end: Option<String>,
}

impl GridStack {
    /// Build a stack, validating that all planes share one geometry and that
    /// band labels are unique.
    pub fn new(
        bands: Vec<(String, GeoGrid)>,
        chl: Option<GeoGrid>,
        time_start: Option<String>,
        time_end: Option<String>,
    ) -> Result<Self> {
        let first = bands
            .first()
            .map(|(_, g)| g)
            .or(chl.as_ref())
            .ok_or_else(|| Error::Argument("a grid stack needs at least one plane".into()))?
            .clone();
        for (name, g) in &bands {
            first.check_same_geometry(g, &format!("band {name}"))?;
        }
        if let Some(c) = &chl {
            first.check_same_geometry(c, "chl plane")?;
        }
        for (i, (name, _)) in bands.iter().enumerate() {
            if bands[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::Schema(format!("duplicate band label {name}")));
            }
        }
        Ok(GridStack {
            bands,
            chl,
            time_start,
            time_end,
        })
    }

    /// Plane with the given label, if present.
    pub fn band(&self, name: &str) -> Option<&GeoGrid> {
        self.bands.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    /// The six canonical reflectance planes in storage order.
    ///
    /// Errors with a schema error naming the first missing band.
    pub fn canonical_bands(&self) -> Result<[&GeoGrid; N_BANDS]> {
        let mut out = Vec::with_capacity(N_BANDS);
        for name in BAND_NAMES {
            out.push(
                self.band(name)
                    .ok_or_else(|| Error::Schema(format!("stack has no {name} plane")))?,
            );
        }
        Ok(out.try_into().expect("exactly six planes"))
    }

    /// Geometry reference plane (first band, else the chl plane).
    pub fn geometry(&self) -> &GeoGrid {
        self.bands
            .first()
            .map(|(_, g)| g)
            .or(self.chl.as_ref())
            .expect("stack construction guarantees at least one plane")
    }
}

/// A table of valid pixels plus, per row, the flat pixel index it came from.
#[derive(Debug, Clone)]
pub struct FlattenedStack {
    pub table: SampleTable,
    /// `pixel_indices[i]` is the row-major index of `table.rows[i]`.
    pub pixel_indices: Vec<usize>,
}

/// Flatten a stack into a sample table, keeping only valid pixels.
///
/// A pixel is valid when all six reflectances are present (non-fill), finite
/// and strictly positive, and — if the stack carries a chlorophyll plane —
/// its chlorophyll is present, finite and strictly positive too. Row order is
/// the row-major north-to-south scan, so the parallel index list makes pixel
/// coordinates recoverable.
pub fn flatten_grid_stack(stack: &GridStack) -> Result<FlattenedStack> {
    let bands = stack.canonical_bands()?;
    let n = stack.geometry().len();
    let mut rows = Vec::new();
    let mut pixel_indices = Vec::new();
    for idx in 0..n {
        let mut rrs = [0.0; N_BANDS];
        let mut ok = true;
        for (j, plane) in bands.iter().enumerate() {
            let v = plane.values[idx];
            if !plane.is_present(idx) || v <= 0.0 {
                ok = false;
                break;
            }
            rrs[j] = v;
        }
        if !ok {
            continue;
        }
        let chl = match &stack.chl {
            Some(plane) => {
                let v = plane.values[idx];
                if !plane.is_present(idx) || v <= 0.0 {
                    continue;
                }
                Some(v)
            }
            None => None,
        };
        rows.push(Sample { rrs, chl });
        pixel_indices.push(idx);
    }
    Ok(FlattenedStack {
        table: SampleTable::new(rows),
        pixel_indices,
    })
}
