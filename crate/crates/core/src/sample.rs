//! Samples, sample tables, column statistics and standardization.
//!
//! A [`Sample`] is one observation: six remote-sensing reflectances (bands at
//! 412, 443, 490, 510, 555 and 670 nm, in that fixed order) plus an optional
//! chlorophyll-a concentration in mg/m^3. Learning always happens on tables
//! of samples; grids are flattened into tables first (see [`crate::grid`]).
//!
//! Units and conventions:
//! * reflectances are dimensionless and must be finite; rows admitted to
//!   training or testing must have every band strictly positive (the
//!   band-ratio baseline takes log ratios, and one validity rule for all
//!   estimators keeps comparisons fair);
//! * chlorophyll, when present, must be finite and strictly positive;
//! * all statistics are population statistics (divide by N).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of reflectance bands per sample.
pub const N_BANDS: usize = 6;

/// Band centre wavelengths in nanometres, in storage order.
pub const WAVELENGTHS: [u32; N_BANDS] = [412, 443, 490, 510, 555, 670];

/// Column labels for the six bands, in storage order.
pub const BAND_NAMES: [&str; N_BANDS] = [
    "rrs_412", "rrs_443", "rrs_490", "rrs_510", "rrs_555", "rrs_670",
];

/// Label of the target column.
pub const CHL_NAME: &str = "chl_a";

/// Index of the band with the given centre wavelength, if it is one of ours.
pub fn band_index(wavelength: u32) -> Option<usize> {
    WAVELENGTHS.iter().position(|&w| w == wavelength)
}

/// One observation: six reflectances and an optional chlorophyll target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Reflectances in [`WAVELENGTHS`] order.
    pub rrs: [f64; N_BANDS],
    /// Chlorophyll-a in mg/m^3, when known.
    pub chl: Option<f64>,
}

impl Sample {
    /// True when every band is finite and strictly positive and the target,
    /// if present, is finite and strictly positive. Only valid samples may
    /// enter training or testing tables.
    pub fn is_valid(&self) -> bool {
        self.rrs.iter().all(|v| v.is_finite() && *v > 0.0)
            && self.chl.map_or(true, |c| c.is_finite() && c > 0.0)
    }
}

/// A column-homogeneous collection of samples.
///
/// All rows share the same band ordering by construction (`rrs` is a fixed
/// array); `band_names` is carried so that derived objects (statistics,
/// standardization parameters) can be checked against the table they are
/// applied to.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    pub band_names: [String; N_BANDS],
    pub rows: Vec<Sample>,
}

impl SampleTable {
    /// Table with the canonical band names.
    pub fn new(rows: Vec<Sample>) -> Self {
        SampleTable {
            band_names: BAND_NAMES.map(str::to_string),
            rows,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Chlorophyll values of all rows; error if any row lacks one.
    ///
    /// Training and evaluation both require a fully labelled table.
    pub fn targets(&self) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.chl
                    .ok_or_else(|| Error::Argument(format!("row {i} has no chl_a value")))
            })
            .collect()
    }

    /// Verify every row satisfies the sample validity rule.
    pub fn check_valid(&self) -> Result<()> {
        for (i, s) in self.rows.iter().enumerate() {
            if !s.is_valid() {
                return Err(Error::Argument(format!(
                    "row {i} violates sample validity (bands finite and > 0; chl_a, if present, finite and > 0)"
                )));
            }
        }
        Ok(())
    }

    fn check_band_names(&self, other: &[String; N_BANDS], what: &str) -> Result<()> {
        if &self.band_names != other {
            return Err(Error::Schema(format!(
                "band names of {what} do not match table: {:?} vs {:?}",
                other, self.band_names
            )));
        }
        Ok(())
    }
}

/// Population statistics of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    /// Population standard deviation (divide by N, not N−1).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

fn column_stats(values: impl Iterator<Item = f64> + Clone) -> ColumnStats {
    let min = values.clone().fold(f64::INFINITY, f64::min);
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        // A constant column gets the exact answer; summing would let
        // rounding move the mean off the value and manufacture phantom
        // variance of a few ulps, which standardization would then blow up
        // into order-one noise.
        return ColumnStats {
            mean: min,
            sd: 0.0,
            min,
            max,
        };
    }
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values
        .map(|v| {
            let d = v - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    ColumnStats {
        mean,
        sd: var.sqrt(),
        min,
        max,
    }
}

/// Per-column statistics of a table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableStats {
    pub band_names: [String; N_BANDS],
    pub bands: [ColumnStats; N_BANDS],
    /// Statistics of the target column, when every row carries one.
    pub chl: Option<ColumnStats>,
}

/// Population mean/sd/min/max of every column of `table`.
///
/// Errors with an argument error on an empty table. The target column is
/// summarized only when all rows carry a target.
pub fn table_stats(table: &SampleTable) -> Result<TableStats> {
    if table.is_empty() {
        return Err(Error::Argument(
            "cannot compute statistics of an empty table".into(),
        ));
    }
    let bands = std::array::from_fn(|j| column_stats(table.rows.iter().map(move |s| s.rrs[j])));
    let chl = if table.rows.iter().all(|s| s.chl.is_some()) {
        Some(column_stats(table.rows.iter().map(|s| s.chl.unwrap())))
    } else {
        None
    };
    Ok(TableStats {
        band_names: table.band_names.clone(),
        bands,
        chl,
    })
}

/// Feature standardization parameters: per-band mean and population sd.
///
/// Stored inside fitted models that standardize internally so prediction can
/// replay the exact training transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: [f64; N_BANDS],
    pub sd: [f64; N_BANDS],
}

impl Standardization {
    pub fn from_stats(stats: &TableStats) -> Self {
        Standardization {
            mean: std::array::from_fn(|j| stats.bands[j].mean),
            sd: std::array::from_fn(|j| stats.bands[j].sd),
        }
    }

    /// Transform one feature vector: `(x − mean) / sd`, with zero-sd columns
    /// mapping to 0 (constant columns carry no information).
    pub fn apply(&self, rrs: &[f64; N_BANDS]) -> [f64; N_BANDS] {
        std::array::from_fn(|j| {
            if self.sd[j] == 0.0 {
                0.0
            } else {
                (rrs[j] - self.mean[j]) / self.sd[j]
            }
        })
    }
}

/// Standardize the feature columns of `table` with the given statistics.
///
/// The target column is left untouched. Note this is *not* idempotent:
/// re-applying statistics taken from the original table to an already
/// standardized table rescales it again.
///
/// Errors with a schema error if `stats` was computed for different band
/// names than `table` carries.
pub fn standardize(table: &SampleTable, stats: &TableStats) -> Result<SampleTable> {
    table.check_band_names(&stats.band_names, "statistics")?;
    let params = Standardization::from_stats(stats);
    let rows = table
        .rows
        .iter()
        .map(|s| Sample {
            rrs: params.apply(&s.rrs),
            chl: s.chl,
        })
        .collect();
    Ok(SampleTable {
        band_names: table.band_names.clone(),
        rows,
    })
}
