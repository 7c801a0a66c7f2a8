//! Deterministic synthetic benchmark data.
//!
//! A desk-scale stand-in for a satellite match-up archive: each sample is
//! drawn by inverting the band-ratio relation. A log ratio `R` is drawn
//! uniformly from [`R_MIN`, `R_MAX`]; the 555 nm band is pinned at
//! [`RHO_555`]; the 490 nm band carries the signal as `ρ555·10^R`; the
//! remaining bands sit at fixed fractions of ρ555 chosen so the maximum
//! band ratio always picks 490 (both passive numerator fractions are below
//! `10^R_MIN ≈ 0.501`). The target is the band-ratio chlorophyll of the
//! clean spectrum — computed through the same code path the baseline
//! estimator uses, so at zero noise the baseline inverts the generator
//! exactly, bit for bit, even after a CSV round trip.
//!
//! Multiplicative log-normal noise `exp(σ·g)`, `g ~ N(0,1)`, is then applied
//! to every band (never to the target). The per-row draw order is fixed
//! (one ratio draw, then six noise draws) and the generator consumes its own
//! seeded RNG stream, so a given `(n, noise, seed)` always produces the same
//! table — independent of the noise level's effect on other streams.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::baseline::{baseline_chl, BandRatioCoeffs};
use crate::error::{Error, Result};
use crate::rng::synth_rng;
use crate::sample::{Sample, SampleTable, N_BANDS};

/// Reflectance pinned at 555 nm (sr⁻¹), a mid-oceanic value.
pub const RHO_555: f64 = 0.005;
/// Passive band levels as fractions of ρ555.
pub const FRACTION_412: f64 = 0.90;
pub const FRACTION_443: f64 = 0.45;
pub const FRACTION_510: f64 = 0.40;
pub const FRACTION_670: f64 = 0.10;
/// Log-ratio range; spans roughly 1–5600 mg/m³ under the default
/// coefficients.
pub const R_MIN: f64 = -0.3;
pub const R_MAX: f64 = 1.0;

/// Smallest table the generator will produce.
pub const MIN_SYNTH_ROWS: usize = 1000;

/// The clean six-band spectrum for a log ratio `r`.
fn clean_spectrum(r: f64) -> [f64; N_BANDS] {
    [
        FRACTION_412 * RHO_555,
        FRACTION_443 * RHO_555,
        RHO_555 * 10f64.powf(r),
        FRACTION_510 * RHO_555,
        RHO_555,
        FRACTION_670 * RHO_555,
    ]
}

/// Generate `n` labelled samples with the given band noise fraction.
pub fn synthetic_table(n: usize, noise: f64, seed: u64) -> Result<SampleTable> {
    if n < MIN_SYNTH_ROWS {
        return Err(Error::Argument(format!(
            "synthetic benchmark needs at least {MIN_SYNTH_ROWS} rows, got {n}"
        )));
    }
    if noise < 0.0 || !noise.is_finite() {
        return Err(Error::Argument(format!(
            "noise must be a non-negative finite fraction, got {noise}"
        )));
    }
    let coeffs = BandRatioCoeffs::paper();
    let mut rng = synth_rng(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let r = rng.gen_range(R_MIN..R_MAX);
        let clean = clean_spectrum(r);
        let chl = baseline_chl(
            &Sample {
                rrs: clean,
                chl: None,
            },
            &coeffs,
        )?;
        let mut rrs = clean;
        for band in rrs.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            // exp(0·g) is exactly 1, so noise 0 leaves the spectrum
            // untouched bitwise while consuming the same number of draws.
            *band *= (noise * g).exp();
        }
        rows.push(Sample {
            rrs,
            chl: Some(chl),
        });
    }
    Ok(SampleTable::new(rows))
}
