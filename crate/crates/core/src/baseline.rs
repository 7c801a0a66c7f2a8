//! Maximum-band-ratio chlorophyll baseline.
//!
//! The classic OC4-style estimate: take the largest of three blue/green
//! reflectance ratios, its base-10 logarithm `R`, and a fourth-order
//! polynomial in `R` as the exponent of the retrieved concentration:
//!
//! ```text
//! R   = log10( max(rrs_443, rrs_490, rrs_510) / rrs_555 )
//! chl = 10 ^ (a0 + a1·R + a2·R² + a3·R³ + a4·R⁴)        [mg/m³]
//! ```
//!
//! Two built-in coefficient vectors are provided. They differ only in the
//! cubic term: [`PAPER`] uses a3 = 6.049 as sometimes printed, while
//! [`CANONICAL`] uses the widely circulated OC4v4 value a3 = 0.649. Both are
//! exposed because retrievals differ materially away from R = 0; callers
//! choose explicitly (the CLI defaults to `paper`).

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{GeoGrid, GridStack};
use crate::sample::{band_index, Sample, BAND_NAMES};

/// Coefficients and band wiring of a maximum-band-ratio model.
#[derive(Debug, Clone, PartialEq)]
pub struct BandRatioCoeffs {
    /// Polynomial coefficients a0..a4 applied to powers of R.
    pub a: [f64; 5],
    /// Centre wavelengths (nm) of the numerator bands.
    pub numerator: Vec<u32>,
    /// Centre wavelength (nm) of the denominator band.
    pub denominator: u32,
}

/// Polynomial coefficients of the set named `paper` (cubic term 6.049).
pub const PAPER_A: [f64; 5] = [0.366, -3.067, 1.930, 6.049, -1.532];

/// Polynomial coefficients of the set named `canonical` (OC4v4 cubic 0.649).
pub const CANONICAL_A: [f64; 5] = [0.366, -3.067, 1.930, 0.649, -1.532];

impl BandRatioCoeffs {
    /// The built-in set named `paper` (cubic term 6.049).
    pub fn paper() -> Self {
        BandRatioCoeffs {
            a: PAPER_A,
            numerator: vec![443, 490, 510],
            denominator: 555,
        }
    }

    /// The built-in set named `canonical` (cubic term 0.649).
    pub fn canonical() -> Self {
        BandRatioCoeffs {
            a: CANONICAL_A,
            numerator: vec![443, 490, 510],
            denominator: 555,
        }
    }

    /// Indices (into sample band order) of numerator bands and denominator.
    fn band_indices(&self) -> Result<(Vec<usize>, usize)> {
        if self.numerator.is_empty() {
            return Err(Error::Schema(
                "coefficient set lists no numerator bands".into(),
            ));
        }
        let num = self
            .numerator
            .iter()
            .map(|&w| {
                band_index(w).ok_or_else(|| {
                    Error::Schema(format!(
                        "numerator wavelength {w} nm is not one of the six bands"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let den = band_index(self.denominator).ok_or_else(|| {
            Error::Schema(format!(
                "denominator wavelength {} nm is not one of the six bands",
                self.denominator
            ))
        })?;
        Ok((num, den))
    }
}

/// JSON shape of a user-supplied coefficient file:
/// `{"a": [a0..a4], "numerator": [nm...], "denominator": nm}`.
#[derive(Deserialize)]
struct CoeffsJson {
    a: Vec<f64>,
    numerator: Vec<u32>,
    denominator: u32,
}

/// Parse a coefficient set from its JSON representation.
pub fn coeffs_from_json(text: &str) -> Result<BandRatioCoeffs> {
    let raw: CoeffsJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("coefficient file: {e}")))?;
    if raw.a.len() != 5 {
        return Err(Error::Schema(format!(
            "coefficient file must list exactly 5 polynomial coefficients, got {}",
            raw.a.len()
        )));
    }
    if !raw.a.iter().all(|v| v.is_finite()) {
        return Err(Error::Schema(
            "polynomial coefficients must be finite".into(),
        ));
    }
    let coeffs = BandRatioCoeffs {
        a: raw.a.try_into().expect("length checked"),
        numerator: raw.numerator,
        denominator: raw.denominator,
    };
    coeffs.band_indices()?; // validate wiring eagerly
    Ok(coeffs)
}

/// `R`: base-10 log of the largest numerator/denominator reflectance ratio.
///
/// Every referenced band must be strictly positive and finite; violations
/// raise a domain error naming the band.
pub fn max_band_ratio(sample: &Sample, coeffs: &BandRatioCoeffs) -> Result<f64> {
    let (num, den) = coeffs.band_indices()?;
    let check = |idx: usize| -> Result<f64> {
        let v = sample.rrs[idx];
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Domain(format!(
                "band {} must be positive and finite for a log ratio, got {v}",
                BAND_NAMES[idx]
            )));
        }
        Ok(v)
    };
    let d = check(den)?;
    let mut best = f64::NEG_INFINITY;
    for idx in num {
        let r = check(idx)? / d;
        if r > best {
            best = r;
        }
    }
    Ok(best.log10())
}

/// `10^(a0 + a1·R + a2·R² + a3·R³ + a4·R⁴)`, evaluated by Horner's rule.
pub fn polynomial_chl(r: f64, coeffs: &BandRatioCoeffs) -> f64 {
    let a = &coeffs.a;
    let p = (((a[4] * r + a[3]) * r + a[2]) * r + a[1]) * r + a[0];
    10f64.powf(p)
}

/// Baseline chlorophyll for one sample.
pub fn baseline_chl(sample: &Sample, coeffs: &BandRatioCoeffs) -> Result<f64> {
    Ok(polynomial_chl(max_band_ratio(sample, coeffs)?, coeffs))
}

/// Apply the baseline per pixel over a stack.
///
/// Pixels where any referenced band is missing (fill), non-finite or
/// non-positive become fill in the output. Missing band *planes* raise a
/// schema error.
pub fn baseline_grid(stack: &GridStack, coeffs: &BandRatioCoeffs) -> Result<GeoGrid> {
    let (num, den) = coeffs.band_indices()?;
    let mut referenced = num.clone();
    referenced.push(den);
    let planes = referenced
        .iter()
        .map(|&idx| {
            stack
                .band(BAND_NAMES[idx])
                .ok_or_else(|| Error::Schema(format!("stack has no {} plane", BAND_NAMES[idx])))
        })
        .collect::<Result<Vec<_>>>()?;

    let geometry = stack.geometry();
    let mut out = geometry.filled_like();
    'pixel: for idx in 0..geometry.len() {
        let mut rrs = [1.0; crate::sample::N_BANDS]; // unreferenced bands are irrelevant
        for (&band, plane) in referenced.iter().zip(&planes) {
            let v = plane.values[idx];
            if !plane.is_present(idx) || v <= 0.0 {
                continue 'pixel;
            }
            rrs[band] = v;
        }
        let sample = Sample { rrs, chl: None };
        out.values[idx] = baseline_chl(&sample, coeffs)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GeoGrid, DEFAULT_FILL};
    use crate::sample::N_BANDS;

    use std::f64::consts::LOG10_2;

    // Independently computed reference values (40-digit arithmetic), frozen.
    const TEN_POW_0366: f64 = 2.322736796357106887563873368138335549;
    const PAPER_AT_HALF: f64 = 0.944876396011152335764294706172646680;
    const CANONICAL_AT_HALF: f64 = 0.199698590696992159232042299904268021;

    fn sample_with_ratios(r443: f64, r490: f64, r510: f64) -> Sample {
        let d = 0.005;
        Sample {
            rrs: [0.004, r443 * d, r490 * d, r510 * d, d, 0.0005],
            chl: None,
        }
    }

    #[test]
    fn built_in_sets_differ_only_in_cubic_term() {
        let p = BandRatioCoeffs::paper();
        let c = BandRatioCoeffs::canonical();
        assert_eq!(p.a[0], 0.366);
        assert_eq!(p.a[1], -3.067);
        assert_eq!(p.a[2], 1.930);
        assert_eq!(p.a[3], 6.049);
        assert_eq!(p.a[4], -1.532);
        assert_eq!(c.a[3], 0.649);
        assert_eq!(&p.a[..3], &c.a[..3]);
        assert_eq!(p.a[4], c.a[4]);
        assert_eq!(p.numerator, vec![443, 490, 510]);
        assert_eq!(p.denominator, 555);
    }

    #[test]
    fn max_ratio_picks_the_largest() {
        let s = sample_with_ratios(2.0, 1.0, 0.5);
        let r = max_band_ratio(&s, &BandRatioCoeffs::paper()).unwrap();
        assert!((r - LOG10_2).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_referenced_band_is_domain_error() {
        let mut s = sample_with_ratios(2.0, 1.0, 0.5);
        s.rrs[1] = 0.0;
        let err = max_band_ratio(&s, &BandRatioCoeffs::paper()).unwrap_err();
        assert_eq!(err.class(), "domain");
        assert!(err.to_string().contains("rrs_443"));
        // An unreferenced band may be non-positive without consequence.
        let mut s2 = sample_with_ratios(2.0, 1.0, 0.5);
        s2.rrs[0] = -1.0;
        assert!(max_band_ratio(&s2, &BandRatioCoeffs::paper()).is_ok());
    }

    #[test]
    fn polynomial_at_zero_is_ten_to_a0() {
        let got = polynomial_chl(0.0, &BandRatioCoeffs::paper());
        assert!(((got - TEN_POW_0366) / TEN_POW_0366).abs() < 1e-9);
    }

    #[test]
    fn polynomial_at_half_matches_reference() {
        let p = polynomial_chl(0.5, &BandRatioCoeffs::paper());
        assert!(((p - PAPER_AT_HALF) / PAPER_AT_HALF).abs() < 1e-12);
        let c = polynomial_chl(0.5, &BandRatioCoeffs::canonical());
        assert!(((c - CANONICAL_AT_HALF) / CANONICAL_AT_HALF).abs() < 1e-12);
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let coeffs = BandRatioCoeffs::paper();
        let s = sample_with_ratios(1.7, 0.9, 0.4);
        let r0 = max_band_ratio(&s, &coeffs).unwrap();
        for c in [1e-3, 0.37, 41.0, 1e3] {
            let scaled = Sample {
                rrs: s.rrs.map(|v| v * c),
                chl: None,
            };
            let r = max_band_ratio(&scaled, &coeffs).unwrap();
            assert!((r - r0).abs() < 1e-12, "scale {c}: {r} vs {r0}");
        }
    }

    #[test]
    fn coeff_json_round_trip_and_validation() {
        let text =
            r#"{"a": [0.3, -3.0, 1.9, 0.6, -1.5], "numerator": [443, 490], "denominator": 555}"#;
        let c = coeffs_from_json(text).unwrap();
        assert_eq!(c.a[3], 0.6);
        assert_eq!(c.numerator, vec![443, 490]);

        let bad_len = r#"{"a": [1, 2, 3], "numerator": [443], "denominator": 555}"#;
        assert_eq!(coeffs_from_json(bad_len).unwrap_err().class(), "schema");

        let bad_band = r#"{"a": [1, 2, 3, 4, 5], "numerator": [999], "denominator": 555}"#;
        assert_eq!(coeffs_from_json(bad_band).unwrap_err().class(), "schema");

        let bad_json = "not json";
        assert_eq!(coeffs_from_json(bad_json).unwrap_err().class(), "parse");
    }

    #[test]
    fn grid_application_matches_per_sample_and_fills_invalid() {
        let coeffs = BandRatioCoeffs::paper();
        let grid = |vals: Vec<f64>| {
            GeoGrid::new(1, 3, 30.0, 6.0, -34.0, -8.0, DEFAULT_FILL, vals).unwrap()
        };
        // Pixel 1 has fill in rrs_490, pixel 2 is fine, pixel 0 is fine.
        let values = |base: f64| vec![base, base * 1.1, base * 0.9];
        let mut bands: Vec<(String, GeoGrid)> = BAND_NAMES
            .iter()
            .map(|n| (n.to_string(), grid(values(0.004))))
            .collect();
        bands[2].1.values[1] = DEFAULT_FILL;
        let stack = GridStack::new(bands, None, None, None).unwrap();

        let out = baseline_grid(&stack, &coeffs).unwrap();
        assert!(out.is_fill(out.values[1]));
        for idx in [0usize, 2] {
            let mut rrs = [0.0; N_BANDS];
            for (j, (_, g)) in stack.bands.iter().enumerate() {
                rrs[j] = g.values[idx];
            }
            let expect = baseline_chl(&Sample { rrs, chl: None }, &coeffs).unwrap();
            assert_eq!(out.values[idx], expect);
        }
    }

    #[test]
    fn grid_application_requires_referenced_planes_only() {
        let grid = |v: f64| GeoGrid::new(1, 1, 1.0, 0.0, 0.0, 1.0, DEFAULT_FILL, vec![v]).unwrap();
        // Only the four referenced planes are present: still fine.
        let bands = vec![
            ("rrs_443".to_string(), grid(0.004)),
            ("rrs_490".to_string(), grid(0.005)),
            ("rrs_510".to_string(), grid(0.003)),
            ("rrs_555".to_string(), grid(0.005)),
        ];
        let stack = GridStack::new(bands, None, None, None).unwrap();
        assert!(baseline_grid(&stack, &BandRatioCoeffs::paper()).is_ok());

        // Missing a referenced plane: schema error naming it.
        let bands = vec![
            ("rrs_443".to_string(), grid(0.004)),
            ("rrs_510".to_string(), grid(0.003)),
            ("rrs_555".to_string(), grid(0.005)),
        ];
        let stack = GridStack::new(bands, None, None, None).unwrap();
        let err = baseline_grid(&stack, &BandRatioCoeffs::paper()).unwrap_err();
        assert_eq!(err.class(), "schema");
        assert!(err.to_string().contains("rrs_490"));
    }
}
