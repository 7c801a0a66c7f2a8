//! Epsilon-insensitive support vector regression with an RBF kernel.
//!
//! The dual problem is solved by pairwise coordinate ascent (SMO) on the net
//! coefficients `beta_i = alpha_i − alpha_i*`, each boxed in `[−C, C]` and
//! jointly constrained by `sum(beta) = 0`. Internally the solver tracks the
//! classic doubled variable vector `a = [alpha; alpha*]` with gradients
//!
//! ```text
//! G_i  =  (K beta)_i + eps − y_i          (i < n,  z_i = +1)
//! G_i  = −(K beta)_i + eps + y_i          (i >= n, z_i = −1)
//! ```
//!
//! Each iteration picks the maximal violating pair: `i` maximizing `−z·G`
//! over variables with upward headroom, `j` minimizing it over variables with
//! downward headroom, then takes the exact analytic step along the equality
//! constraint, clipped to the box. Optimality is declared when the violation
//! gap `m − M` drops to `tol`; hitting `max_iter` first returns the model
//! with a convergence warning instead of failing.
//!
//! The kernel is `k(u, v) = exp(−gamma · ||u − v||²)`. Features must already
//! be standardized by the caller; `gamma = "scale"` resolves to
//! `1 / (6 · mean per-feature population variance)` of those features.
//!
//! Prediction: `f(x) = sum_i beta_i · k(x_i, x) + b` over the support
//! vectors (rows with non-zero beta).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::N_BANDS;

/// Curvature floor for degenerate pairs (duplicate points).
const TAU: f64 = 1e-12;

/// RBF width specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    /// `1 / (6 · mean feature variance)` of the (standardized) features.
    #[serde(rename = "scale", with = "scale_literal")]
    Scale,
    /// Explicit positive width.
    Value(f64),
}

/// Serde helper: `Scale` appears in JSON as the string literal `"scale"`.
mod scale_literal {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("scale")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let text = String::deserialize(d)?;
        if text == "scale" {
            Ok(())
        } else {
            Err(de::Error::custom(format!("unknown gamma keyword {text:?}")))
        }
    }
}

/// SVR hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    /// Box constraint; larger fits the tube tighter.
    pub c: f64,
    /// Half-width of the insensitive tube.
    pub epsilon: f64,
    /// RBF width.
    pub gamma: GammaSpec,
    /// Stop when the maximal KKT violation drops to this value.
    pub tol: f64,
    /// Cap on pair updates before giving up with a warning.
    pub max_iter: u64,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: 1.0,
            epsilon: 0.1,
            gamma: GammaSpec::Scale,
            tol: 1e-3,
            max_iter: 1_000_000,
        }
    }
}

impl SvrParams {
    pub fn validate(&self) -> Result<()> {
        if self.c <= 0.0 || !self.c.is_finite() {
            return Err(Error::Argument(format!(
                "C must be positive and finite, got {}",
                self.c
            )));
        }
        if self.epsilon < 0.0 || !self.epsilon.is_finite() {
            return Err(Error::Argument(format!(
                "epsilon must be non-negative and finite, got {}",
                self.epsilon
            )));
        }
        if let GammaSpec::Value(g) = self.gamma {
            if g <= 0.0 || !g.is_finite() {
                return Err(Error::Argument(format!(
                    "gamma must be positive and finite, got {g}"
                )));
            }
        }
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return Err(Error::Argument(format!(
                "tol must be positive and finite, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Argument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Fitted SVR: support vectors in standardized feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrPayload {
    pub support_vectors: Vec<[f64; N_BANDS]>,
    /// Net dual coefficient of each support vector, in `[-C, C]`.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    /// Resolved RBF width actually used.
    pub gamma: f64,
    /// False when the solver hit `max_iter` before reaching `tol`.
    pub converged: bool,
}

impl SvrPayload {
    pub fn predict(&self, x: &[f64; N_BANDS]) -> f64 {
        let mut acc = self.bias;
        for (sv, beta) in self.support_vectors.iter().zip(&self.coefficients) {
            acc += beta * rbf(self.gamma, sv, x);
        }
        acc
    }
}

pub(crate) fn rbf(gamma: f64, u: &[f64; N_BANDS], v: &[f64; N_BANDS]) -> f64 {
    let mut d2 = 0.0;
    for j in 0..N_BANDS {
        let d = u[j] - v[j];
        d2 += d * d;
    }
    (-gamma * d2).exp()
}

/// Resolve a gamma specification against the features the kernel will see.
pub(crate) fn resolve_gamma(spec: GammaSpec, x: &[[f64; N_BANDS]]) -> f64 {
    match spec {
        GammaSpec::Value(g) => g,
        GammaSpec::Scale => {
            let n = x.len() as f64;
            let mut mean_var = 0.0;
            for j in 0..N_BANDS {
                let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
                let var = x
                    .iter()
                    .map(|r| {
                        let d = r[j] - mean;
                        d * d
                    })
                    .sum::<f64>()
                    / n;
                mean_var += var / N_BANDS as f64;
            }
            if mean_var > 0.0 {
                1.0 / (N_BANDS as f64 * mean_var)
            } else {
                // All features constant: width is irrelevant (all distances 0).
                1.0
            }
        }
    }
}

/// Fit by SMO on the doubled dual. `x` must already be standardized.
#[allow(clippy::needless_range_loop)] // the doubled dual index t is the formulation
pub fn fit_svr(x: &[[f64; N_BANDS]], y: &[f64], params: &SvrParams) -> Result<SvrPayload> {
    params.validate()?;
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "feature rows ({}) and targets ({}) differ",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n == 0 {
        return Err(Error::Argument("cannot fit SVR on an empty table".into()));
    }
    let gamma = resolve_gamma(params.gamma, x);
    let c = params.c;
    let eps = params.epsilon;

    // Dense kernel matrix; training sets here are desk-scale.
    let kernel: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| rbf(gamma, &x[i], &x[j])).collect())
        .collect();

    // a[0..n] = alpha (z = +1), a[n..2n] = alpha* (z = −1); kb = K·beta.
    let mut a = vec![0.0f64; 2 * n];
    let mut kb = vec![0.0f64; n];
    let z = |t: usize| if t < n { 1.0 } else { -1.0 };
    let grad = |kb: &[f64], t: usize| {
        if t < n {
            kb[t] + eps - y[t]
        } else {
            -kb[t - n] + eps + y[t - n]
        }
    };

    let mut converged = false;
    let mut iterations = 0u64;
    let mut final_gap = (f64::NEG_INFINITY, f64::INFINITY);
    while iterations < params.max_iter {
        // Maximal violating pair over −z·G.
        let mut m_up = f64::NEG_INFINITY;
        let mut i_up = usize::MAX;
        let mut m_low = f64::INFINITY;
        let mut i_low = usize::MAX;
        for t in 0..2 * n {
            let v = -z(t) * grad(&kb, t);
            let headroom_up = if t < n { a[t] < c } else { a[t] > 0.0 };
            let headroom_down = if t < n { a[t] > 0.0 } else { a[t] < c };
            if headroom_up && v > m_up {
                m_up = v;
                i_up = t;
            }
            if headroom_down && v < m_low {
                m_low = v;
                i_low = t;
            }
        }
        final_gap = (m_up, m_low);
        if i_up == usize::MAX || i_low == usize::MAX || m_up - m_low <= params.tol {
            converged = true;
            break;
        }
        let (i, j) = (i_up, i_low);
        let (si, sj) = (i % n, j % n);
        let mut eta = kernel[si][si] + kernel[sj][sj] - 2.0 * kernel[si][sj];
        if eta <= TAU {
            eta = TAU;
        }
        let mut delta = (m_up - m_low) / eta;
        // Clip to keep both variables inside [0, C].
        let room_i = if i < n { c - a[i] } else { a[i] };
        let room_j = if j < n { a[j] } else { c - a[j] };
        delta = delta.min(room_i).min(room_j);
        debug_assert!(delta > 0.0);
        // Feasible direction: da_i = +z_i·delta, da_j = −z_j·delta keeps
        // z^T a constant; the net coefficient beta of sample si rises by
        // delta and of sj falls by delta regardless of which side moved.
        a[i] += z(i) * delta;
        a[j] -= z(j) * delta;
        for t in 0..n {
            kb[t] += delta * (kernel[t][si] - kernel[t][sj]);
        }
        iterations += 1;
    }

    // Bias from free variables, else the midpoint of the final gap.
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for t in 0..2 * n {
        if a[t] > 0.0 && a[t] < c {
            free_sum += -z(t) * grad(&kb, t);
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let (m_up, m_low) = final_gap;
        if m_up.is_finite() && m_low.is_finite() {
            0.5 * (m_up + m_low)
        } else {
            // Degenerate: no movable variable at all (e.g. C = 0 impossible,
            // but guard anyway); fall back to the mean response.
            y.iter().sum::<f64>() / n as f64
        }
    };

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for t in 0..n {
        let beta = a[t] - a[t + n];
        if beta != 0.0 {
            support_vectors.push(x[t]);
            coefficients.push(beta);
        }
    }
    Ok(SvrPayload {
        support_vectors,
        coefficients,
        bias,
        gamma,
        converged,
    })
}
