//! Tree ensembles: bagging, random forest, extremely randomized trees.
//!
//! All three share one fitting loop; they differ in whether members see a
//! bootstrap resample and how a node picks its split:
//!
//! | kind        | resample (default) | split search                        |
//! |-------------|--------------------|-------------------------------------|
//! | bagging     | bootstrap          | exhaustive over `max_features` (6)  |
//! | forest      | bootstrap          | exhaustive over random subset (2)   |
//! | extra trees | none               | one uniform threshold per feature of a random subset (2) |
//!
//! Member `t` draws everything (bootstrap rows, feature subsets, thresholds)
//! from its own ChaCha8 stream keyed by `(seed, t)` (see [`crate::rng`]), so
//! members may be fitted concurrently in any order — results are
//! bit-identical for a fixed seed regardless of thread count. Prediction is
//! the plain mean of member predictions, accumulated in member order.
//!
//! When bootstrap is enabled the per-member in-bag row sets are recorded so
//! out-of-bag error can be computed later ([`compute_oob`]).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::sample::N_BANDS;

use super::tree::{grow_tree, SplitStrategy, TreeNode, TreeParams};

/// Hyperparameters shared by the three ensemble kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    /// Number of member trees.
    pub n_estimators: usize,
    /// Features considered per node, between 1 and 6.
    pub max_features: usize,
    /// Fit each member on a bootstrap resample of the training rows.
    pub bootstrap: bool,
    /// Member tree stopping rules.
    #[serde(flatten)]
    pub tree: TreeParams,
}

impl EnsembleParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_estimators < 1 {
            return Err(Error::Argument("n_estimators must be at least 1".into()));
        }
        if !(1..=N_BANDS).contains(&self.max_features) {
            return Err(Error::Argument(format!(
                "max_features must lie in 1..={N_BANDS}, got {}",
                self.max_features
            )));
        }
        self.tree.validate()
    }
}

/// Which ensemble flavour to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Bagging,
    Forest,
    ExtraTrees,
}

/// Fitted ensemble: member trees and, when bootstrap was used, the sorted
/// unique in-bag row indices of each member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePayload {
    pub trees: Vec<TreeNode>,
    pub in_bag: Option<Vec<Vec<u32>>>,
}

impl EnsemblePayload {
    /// Mean of member predictions, accumulated in member order.
    pub fn predict(&self, x: &[f64; N_BANDS]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        sum / self.trees.len() as f64
    }
}

/// Fit an ensemble. Members are built in parallel; the result only depends
/// on `(x, y, kind, params, seed)`, never on thread scheduling.
pub fn fit_ensemble(
    x: &[[f64; N_BANDS]],
    y: &[f64],
    kind: EnsembleKind,
    params: &EnsembleParams,
    seed: u64,
) -> Result<EnsemblePayload> {
    params.validate()?;
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "feature rows ({}) and targets ({}) differ",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Argument(
            "cannot fit an ensemble on an empty table".into(),
        ));
    }
    let n = x.len();
    let members: Vec<(TreeNode, Option<Vec<u32>>)> = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::tree_rng(seed, t);
            let (rows, in_bag) = if params.bootstrap {
                let rows: Vec<u32> = (0..n).map(|_| rng.gen_range(0..n) as u32).collect();
                let mut bag = rows.clone();
                bag.sort_unstable();
                bag.dedup();
                (rows, Some(bag))
            } else {
                ((0..n as u32).collect(), None)
            };
            let mut strategy = match kind {
                EnsembleKind::Bagging | EnsembleKind::Forest => SplitStrategy::Subset {
                    max_features: params.max_features,
                    rng: &mut rng,
                },
                EnsembleKind::ExtraTrees => SplitStrategy::RandomThreshold {
                    max_features: params.max_features,
                    rng: &mut rng,
                },
            };
            let tree = grow_tree(x, y, &rows, &params.tree, &mut strategy)?;
            Ok((tree, in_bag))
        })
        .collect::<Result<_>>()?;

    let record_bags = params.bootstrap;
    let mut trees = Vec::with_capacity(members.len());
    let mut bags = Vec::with_capacity(members.len());
    for (tree, bag) in members {
        trees.push(tree);
        if let Some(b) = bag {
            bags.push(b);
        }
    }
    Ok(EnsemblePayload {
        trees,
        in_bag: record_bags.then_some(bags),
    })
}

/// Out-of-bag evaluation result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OobReport {
    /// Mean absolute error over covered rows; `None` when nothing is covered.
    pub mae: Option<f64>,
    /// Number of rows predicted by at least one non-containing member.
    pub covered: usize,
}

/// Predict each training row using only the members whose bootstrap resample
/// did not contain it, and report the mean absolute error over covered rows.
///
/// `finalize` maps a raw ensemble output to the target scale (identity for
/// models fitted on raw chlorophyll; `10^x` for log-target fits).
pub(crate) fn oob_error(
    payload: &EnsemblePayload,
    x: &[[f64; N_BANDS]],
    targets: &[f64],
    finalize: impl Fn(f64) -> f64,
) -> Result<OobReport> {
    let in_bag = payload.in_bag.as_ref().ok_or_else(|| {
        Error::State("out-of-bag error requires a model fitted with bootstrap enabled".into())
    })?;
    for bag in in_bag {
        if bag.iter().any(|&r| r as usize >= x.len()) {
            return Err(Error::Dimension(
                "in-bag row indices exceed the provided table; not the fitting table?".into(),
            ));
        }
    }
    let mut covered = 0usize;
    let mut abs_sum = 0.0;
    for (r, (xi, &ti)) in x.iter().zip(targets).enumerate() {
        let r = r as u32;
        let mut n_votes = 0usize;
        let mut sum = 0.0;
        for (tree, bag) in payload.trees.iter().zip(in_bag) {
            if bag.binary_search(&r).is_err() {
                sum += tree.predict(xi);
                n_votes += 1;
            }
        }
        if n_votes > 0 {
            covered += 1;
            abs_sum += (finalize(sum / n_votes as f64) - ti).abs();
        }
    }
    Ok(OobReport {
        mae: (covered > 0).then(|| abs_sum / covered as f64),
        covered,
    })
}
