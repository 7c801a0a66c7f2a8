//! CSV sample tables.
//!
//! Exact format:
//!
//! ```text
//! rrs_412,rrs_443,rrs_490,rrs_510,rrs_555,rrs_670,chl_a
//! 0.00514,0.004774,0.004843,0.003725,0.002835,0.000294,0.079
//! 0.004off,...                                              <- parse error
//! ```
//!
//! * the header line must be exactly the seven names above, in that order;
//! * every record has seven comma-separated cells; the `chl_a` cell may be
//!   empty (unlabelled sample), band cells may not;
//! * numbers are written in Rust's shortest round-trip decimal form and read
//!   back to the identical `f64`;
//! * line endings are a single LF; the file ends with one trailing LF.
//!
//! Reader errors: wrong or permuted header → schema error; wrong cell count →
//! schema error; non-numeric or non-finite cell → parse error.

use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::{Sample, SampleTable, BAND_NAMES, CHL_NAME, N_BANDS};

/// The exact header line (without line terminator).
pub const HEADER: &str = "rrs_412,rrs_443,rrs_490,rrs_510,rrs_555,rrs_670,chl_a";

/// Serialize a table to CSV text.
pub fn encode_table(table: &SampleTable) -> Result<String> {
    if table.band_names.iter().map(String::as_str).ne(BAND_NAMES) {
        return Err(Error::Schema(format!(
            "CSV tables require the canonical band order, got {:?}",
            table.band_names
        )));
    }
    let mut out = String::with_capacity(32 * (table.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for s in &table.rows {
        for v in s.rrs {
            push_f64(&mut out, v);
            out.push(',');
        }
        if let Some(c) = s.chl {
            push_f64(&mut out, c);
        }
        out.push('\n');
    }
    Ok(out)
}

fn push_f64(out: &mut String, v: f64) {
    use std::fmt::Write;
    write!(out, "{v}").expect("writing to a String cannot fail");
}

/// Parse CSV text into a table.
pub fn decode_table(text: &str) -> Result<SampleTable> {
    let mut lines = text.split('\n');
    let header = lines
        .next()
        .ok_or_else(|| Error::Schema("empty file; expected a CSV header".into()))?;
    if header != HEADER {
        return Err(Error::Schema(format!(
            "CSV header must be exactly {HEADER:?}, got {header:?}"
        )));
    }
    let mut rows = Vec::new();
    let mut pending_blank = false;
    for (lineno, line) in lines.enumerate() {
        // One empty trailing fragment after the final LF is the normal EOF.
        if line.is_empty() {
            pending_blank = true;
            continue;
        }
        if pending_blank {
            return Err(Error::Schema(format!(
                "blank line at record {}",
                lineno // previous line number, 1-based data row
            )));
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != N_BANDS + 1 {
            return Err(Error::Schema(format!(
                "record {} has {} cells, expected {}",
                lineno + 1,
                cells.len(),
                N_BANDS + 1
            )));
        }
        let mut rrs = [0.0; N_BANDS];
        for (j, cell) in cells[..N_BANDS].iter().enumerate() {
            rrs[j] = parse_cell(cell, lineno + 1, BAND_NAMES[j])?;
        }
        let chl = if cells[N_BANDS].is_empty() {
            None
        } else {
            Some(parse_cell(cells[N_BANDS], lineno + 1, CHL_NAME)?)
        };
        rows.push(Sample { rrs, chl });
    }
    Ok(SampleTable::new(rows))
}

fn parse_cell(cell: &str, record: usize, column: &str) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| {
        Error::Parse(format!(
            "record {record}, column {column}: {cell:?} is not a number"
        ))
    })?;
    if !v.is_finite() {
        return Err(Error::Parse(format!(
            "record {record}, column {column}: {cell:?} is not finite"
        )));
    }
    Ok(v)
}

/// Write a table to `path` as CSV.
pub fn write_table(path: &Path, table: &SampleTable) -> Result<()> {
    std::fs::write(path, encode_table(table)?)?;
    Ok(())
}

/// Read a table from `path`.
pub fn read_table(path: &Path) -> Result<SampleTable> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::Parse(format!("CSV is not valid UTF-8: {e}")))?;
    decode_table(&text)
}
