//! Ordinary least squares and ridge regression via normal equations.
//!
//! Features are mean-centred before forming the 6x6 normal matrix, which
//! keeps the intercept out of the system entirely: the ridge penalty applies
//! to the weights only (the intercept is never shrunk), and as the penalty
//! grows the weights go to zero and predictions collapse to the target mean.
//! The intercept is recovered as `mean(y) − mean(x)·w`.
//!
//! The solver is Gaussian elimination with partial pivoting; a vanishing
//! pivot means the (centred) features are collinear and raises a rank error
//! naming the offending column.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{BAND_NAMES, N_BANDS};

/// Fitted affine model: `chl = intercept + weights · rrs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPayload {
    pub intercept: f64,
    pub weights: [f64; N_BANDS],
}

impl LinearPayload {
    pub fn predict(&self, rrs: &[f64; N_BANDS]) -> f64 {
        let mut acc = self.intercept;
        for (w, v) in self.weights.iter().zip(rrs) {
            acc += w * v;
        }
        acc
    }
}

/// Ordinary least squares (ridge with zero penalty).
pub fn fit_linear(x: &[[f64; N_BANDS]], y: &[f64]) -> Result<LinearPayload> {
    fit_ridge(x, y, 0.0)
}

/// Ridge regression with penalty `lambda >= 0` on the weights (not the
/// intercept). `lambda = 0` is exactly ordinary least squares.
///
/// Requires at least `N_BANDS + 1` rows (six weights plus an intercept);
/// collinear features raise a rank error.
pub fn fit_ridge(x: &[[f64; N_BANDS]], y: &[f64], lambda: f64) -> Result<LinearPayload> {
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(Error::Argument(format!(
            "ridge penalty must be finite and non-negative, got {lambda}"
        )));
    }
    let n = x.len();
    if n != y.len() {
        return Err(Error::Dimension(format!(
            "feature rows ({n}) and targets ({}) differ",
            y.len()
        )));
    }
    if n < N_BANDS + 1 {
        return Err(Error::Argument(format!(
            "linear fits need at least {} rows, got {n}",
            N_BANDS + 1
        )));
    }

    let nf = n as f64;
    let mut mean_x = [0.0; N_BANDS];
    for row in x {
        for j in 0..N_BANDS {
            mean_x[j] += row[j];
        }
    }
    for m in &mut mean_x {
        *m /= nf;
    }
    let mean_y = y.iter().sum::<f64>() / nf;

    // Normal matrix Xc'Xc + lambda*I and right-hand side Xc'yc.
    let mut a = [[0.0f64; N_BANDS]; N_BANDS];
    let mut b = [0.0f64; N_BANDS];
    for (row, &yi) in x.iter().zip(y) {
        let mut c = [0.0; N_BANDS];
        for j in 0..N_BANDS {
            c[j] = row[j] - mean_x[j];
        }
        let dy = yi - mean_y;
        for j in 0..N_BANDS {
            for k in j..N_BANDS {
                a[j][k] += c[j] * c[k];
            }
            b[j] += c[j] * dy;
        }
    }
    // Mirror the accumulated upper triangle; both indices are the point.
    #[allow(clippy::needless_range_loop)]
    for j in 0..N_BANDS {
        for k in 0..j {
            a[j][k] = a[k][j];
        }
        a[j][j] += lambda;
    }

    let weights = solve(&mut a, &mut b)?;
    let mut intercept = mean_y;
    for j in 0..N_BANDS {
        intercept -= weights[j] * mean_x[j];
    }
    Ok(LinearPayload { intercept, weights })
}

/// Gaussian elimination with partial pivoting on a square system.
///
/// A pivot below `1e-12` times the largest initial matrix entry is treated as
/// rank deficiency at that column.
#[allow(clippy::needless_range_loop)] // row/column index arithmetic throughout
fn solve(a: &mut [[f64; N_BANDS]; N_BANDS], b: &mut [f64; N_BANDS]) -> Result<[f64; N_BANDS]> {
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);

    for col in 0..N_BANDS {
        let pivot_row = (col..N_BANDS)
            .max_by(|&r1, &r2| {
                a[r1][col]
                    .abs()
                    .partial_cmp(&a[r2][col].abs())
                    .expect("pivots are finite")
            })
            .expect("column range is non-empty");
        if a[pivot_row][col].abs() <= tol {
            return Err(Error::Rank(format!(
                "normal matrix is singular at column {col} ({}): features are collinear or constant",
                BAND_NAMES[col]
            )));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..N_BANDS {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..N_BANDS {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; N_BANDS];
    for col in (0..N_BANDS).rev() {
        let mut acc = b[col];
        for k in col + 1..N_BANDS {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}
