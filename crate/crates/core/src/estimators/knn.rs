//! k-nearest-neighbour regression on standardized features.
//!
//! Distances are squared Euclidean (monotone in the true distance, cheaper,
//! and exact for ties). Neighbour selection is fully deterministic: rows are
//! ranked by `(squared distance, row index)` lexicographically, so equidistant
//! rows resolve to the lower index. Aggregation over the selected targets runs
//! in that sorted order, making the result bit-for-bit reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::N_BANDS;

/// How the selected neighbour targets are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Mean,
    Median,
}

/// k-NN hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: u32,
    pub aggregation: Aggregation,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams {
            k: 5,
            aggregation: Aggregation::Mean,
        }
    }
}

impl KnnParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Argument("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// The "fit" is the standardized training set itself.
///
/// `params` are not part of the serde form (the model file keeps them in its
/// hyperparameter section); deserialized payloads need them restored by the
/// caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnPayload {
    #[serde(skip)]
    pub params: KnnParams,
    pub features: Vec<[f64; N_BANDS]>,
    pub targets: Vec<f64>,
}

pub fn fit_knn(x: &[[f64; N_BANDS]], y: &[f64], params: &KnnParams) -> Result<KnnPayload> {
    params.validate()?;
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "feature rows ({}) and targets ({}) differ",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Argument("cannot fit k-NN on an empty table".into()));
    }
    Ok(KnnPayload {
        params: *params,
        features: x.to_vec(),
        targets: y.to_vec(),
    })
}

fn squared_distance(u: &[f64; N_BANDS], v: &[f64; N_BANDS]) -> f64 {
    let mut d2 = 0.0;
    for j in 0..N_BANDS {
        let d = u[j] - v[j];
        d2 += d * d;
    }
    d2
}

impl KnnPayload {
    /// Indices of the `k` nearest rows, sorted ascending by
    /// `(squared distance, index)`.
    fn neighbours(&self, x: &[f64; N_BANDS]) -> Result<Vec<(f64, usize)>> {
        let k = self.params.k as usize;
        let n = self.features.len();
        if k > n {
            return Err(Error::Argument(format!(
                "k ({k}) exceeds the number of training rows ({n})"
            )));
        }
        // Bounded selection: keep the k best seen so far, worst on top.
        // Orderings use (d2, index) pairs; distances are finite by
        // construction so total comparison is safe.
        let mut heap: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        let worse = |a: &(f64, usize), b: &(f64, usize)| a.0 > b.0 || (a.0 == b.0 && a.1 > b.1);
        for (i, row) in self.features.iter().enumerate() {
            let cand = (squared_distance(row, x), i);
            if heap.len() < k {
                heap.push(cand);
                heap.sort_by(|a, b| {
                    a.0.partial_cmp(&b.0)
                        .expect("finite distance")
                        .then(a.1.cmp(&b.1))
                });
            } else if worse(heap.last().expect("non-empty"), &cand) {
                heap.pop();
                let pos = heap
                    .binary_search_by(|p| {
                        p.0.partial_cmp(&cand.0)
                            .expect("finite distance")
                            .then(p.1.cmp(&cand.1))
                    })
                    .unwrap_err();
                heap.insert(pos, cand);
            }
        }
        Ok(heap)
    }

    pub fn predict(&self, x: &[f64; N_BANDS]) -> Result<f64> {
        let selected = self.neighbours(x)?;
        let values: Vec<f64> = selected.iter().map(|&(_, i)| self.targets[i]).collect();
        Ok(match self.params.aggregation {
            Aggregation::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregation::Median => {
                let mut sorted = values;
                sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite target"));
                let mid = sorted.len() / 2;
                if sorted.len() % 2 == 1 {
                    sorted[mid]
                } else {
                    0.5 * (sorted[mid - 1] + sorted[mid])
                }
            }
        })
    }
}
