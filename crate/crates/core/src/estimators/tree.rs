//! CART regression trees.
//!
//! Split quality is the impurity decrease
//! `N·Var(parent) − N_L·Var(left) − N_R·Var(right)` (population variances),
//! computed as sums of squared deviations from the parent mean so that a
//! constant target yields exactly zero for every candidate. The best split
//! scans every feature in ascending index order and, within a feature, every
//! midpoint between consecutive distinct sorted values in ascending order;
//! ties keep the first candidate, i.e. the lowest feature index, then the
//! lowest threshold. A node only splits when the decrease is strictly
//! positive.
//!
//! Rows are carried as index multisets so bootstrap resamples (duplicated
//! rows) weight the variance math naturally.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::N_BANDS;

/// Stopping rules shared by single trees and ensemble members.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Maximum node depth; the root is at depth 0 and a node at the maximum
    /// depth is never split. `None` means unlimited.
    pub max_depth: Option<u32>,
    /// Minimum number of rows a node needs to be considered for a split.
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::Argument(format!(
                "min_samples_split must be at least 2, got {}",
                self.min_samples_split
            )));
        }
        Ok(())
    }
}

/// A fitted tree node.
///
/// The serde form is nested JSON: a leaf is `{"leaf_value": v}` and an
/// internal node is `{"feature": j, "threshold": t, "left": …, "right": …}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Leaf {
        #[serde(rename = "leaf_value")]
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Walk the tree: `x[feature] <= threshold` goes left.
    pub fn predict(&self, x: &[f64; N_BANDS]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn depth(&self) -> u32 {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// A candidate split and its impurity decrease.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub decrease: f64,
}

/// Exhaustive best split over `features` for the row multiset `rows`.
///
/// Returns `None` when the node is too small or no candidate strictly
/// reduces impurity. Errors on an empty feature set.
pub fn find_best_split(
    x: &[[f64; N_BANDS]],
    y: &[f64],
    rows: &[u32],
    features: &[usize],
    min_samples_split: usize,
) -> Result<Option<SplitCandidate>> {
    if features.is_empty() {
        return Err(Error::Argument(
            "split search needs at least one feature".into(),
        ));
    }
    let n = rows.len();
    if n < min_samples_split || n < 2 {
        return Ok(None);
    }
    let nf = n as f64;
    let mean = rows.iter().map(|&r| y[r as usize]).sum::<f64>() / nf;

    let mut best: Option<SplitCandidate> = None;
    let mut order: Vec<u32> = Vec::with_capacity(n);
    for &feature in features {
        order.clear();
        order.extend_from_slice(rows);
        // Sort by value then row index so duplicated rows stay adjacent and
        // the prefix accumulation order is deterministic.
        order.sort_unstable_by(|&a, &b| {
            x[a as usize][feature]
                .partial_cmp(&x[b as usize][feature])
                .expect("features are finite")
                .then(a.cmp(&b))
        });

        let mut total_s = 0.0;
        let mut total_q = 0.0;
        for &r in order.iter() {
            let d = y[r as usize] - mean;
            total_s += d;
            total_q += d * d;
        }
        let sse_parent = total_q - total_s * total_s / nf;

        let mut left_s = 0.0;
        let mut left_q = 0.0;
        for i in 1..n {
            let prev = x[order[i - 1] as usize][feature];
            let d = y[order[i - 1] as usize] - mean;
            left_s += d;
            left_q += d * d;
            let cur = x[order[i] as usize][feature];
            if prev == cur {
                continue;
            }
            let threshold = split_threshold(prev, cur);
            let nl = i as f64;
            let nr = nf - nl;
            let right_s = total_s - left_s;
            let right_q = total_q - left_q;
            let sse_left = left_q - left_s * left_s / nl;
            let sse_right = right_q - right_s * right_s / nr;
            let decrease = sse_parent - sse_left - sse_right;
            if decrease > 0.0 && best.map_or(true, |b| decrease > b.decrease) {
                best = Some(SplitCandidate {
                    feature,
                    threshold,
                    decrease,
                });
            }
        }
    }
    Ok(best)
}

/// Midpoint between two consecutive distinct values, guarded so the
/// partition induced by `x <= threshold` is exactly the one scored: when the
/// midpoint rounds up to `cur` it falls back to `prev`.
pub(crate) fn split_threshold(prev: f64, cur: f64) -> f64 {
    let mid = 0.5 * (prev + cur);
    if mid < cur {
        mid
    } else {
        prev
    }
}

/// How a node picks its split.
pub(crate) enum SplitStrategy<'r> {
    /// Scan all six features (single CART tree).
    Exhaustive,
    /// Scan a per-node random subset of `max_features` features.
    Subset {
        max_features: usize,
        rng: &'r mut ChaCha8Rng,
    },
    /// Per-node random subset and one uniform random threshold per feature
    /// (extremely randomized trees).
    RandomThreshold {
        max_features: usize,
        rng: &'r mut ChaCha8Rng,
    },
}

/// Grow a tree on the row multiset `rows`.
pub(crate) fn grow_tree(
    x: &[[f64; N_BANDS]],
    y: &[f64],
    rows: &[u32],
    params: &TreeParams,
    strategy: &mut SplitStrategy,
) -> Result<TreeNode> {
    if rows.is_empty() {
        return Err(Error::Argument("cannot grow a tree on zero rows".into()));
    }
    grow_node(x, y, rows, params, strategy, 0)
}

fn grow_node(
    x: &[[f64; N_BANDS]],
    y: &[f64],
    rows: &[u32],
    params: &TreeParams,
    strategy: &mut SplitStrategy,
    depth: u32,
) -> Result<TreeNode> {
    let leaf = |rows: &[u32]| {
        let value = rows.iter().map(|&r| y[r as usize]).sum::<f64>() / rows.len() as f64;
        TreeNode::Leaf { value }
    };
    if params.max_depth.is_some_and(|d| depth >= d) || rows.len() < params.min_samples_split {
        return Ok(leaf(rows));
    }
    let chosen = match strategy {
        SplitStrategy::Exhaustive => {
            find_best_split(x, y, rows, &[0, 1, 2, 3, 4, 5], params.min_samples_split)?
        }
        SplitStrategy::Subset { max_features, rng } => {
            let subset = draw_feature_subset(*max_features, rng);
            find_best_split(x, y, rows, &subset, params.min_samples_split)?
        }
        SplitStrategy::RandomThreshold { max_features, rng } => {
            let subset = draw_feature_subset(*max_features, rng);
            random_threshold_split(x, y, rows, &subset, rng)
        }
    };
    let Some(split) = chosen else {
        return Ok(leaf(rows));
    };
    let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = rows
        .iter()
        .partition(|&&r| x[r as usize][split.feature] <= split.threshold);
    debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
    // Left subtree first: random draws are consumed in a fixed visit order.
    let left = grow_node(x, y, &left_rows, params, strategy, depth + 1)?;
    let right = grow_node(x, y, &right_rows, params, strategy, depth + 1)?;
    Ok(TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(left),
        right: Box::new(right),
    })
}

/// Draw `max_features` distinct feature indices (partial Fisher–Yates over
/// the six indices), returned in ascending order so the tie rule "lowest
/// feature index wins" applies within the subset.
fn draw_feature_subset(max_features: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pool: [usize; N_BANDS] = [0, 1, 2, 3, 4, 5];
    let take = max_features.min(N_BANDS);
    for i in 0..take {
        let j = rng.gen_range(i..N_BANDS);
        pool.swap(i, j);
    }
    let mut subset = pool[..take].to_vec();
    subset.sort_unstable();
    subset
}

/// Extremely randomized candidate: per feature one uniform threshold draw in
/// `(min, max)`; the best of the candidates by impurity decrease wins.
///
/// Constant features yield no candidate (and consume no draw); a draw whose
/// rounded threshold fails to separate the rows is likewise discarded.
fn random_threshold_split(
    x: &[[f64; N_BANDS]],
    y: &[f64],
    rows: &[u32],
    features: &[usize],
    rng: &mut ChaCha8Rng,
) -> Option<SplitCandidate> {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|&r| y[r as usize]).sum::<f64>() / n;
    let mut total_q = 0.0;
    let mut total_s = 0.0;
    for &r in rows {
        let d = y[r as usize] - mean;
        total_s += d;
        total_q += d * d;
    }
    let sse_parent = total_q - total_s * total_s / n;

    let mut best: Option<SplitCandidate> = None;
    for &feature in features {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &r in rows {
            let v = x[r as usize][feature];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo >= hi {
            continue; // constant feature: no draw possible
        }
        let u: f64 = rng.gen();
        let threshold = lo + u * (hi - lo);
        if threshold >= hi {
            continue; // rounded to the top value: cannot separate
        }
        let mut nl = 0.0;
        let mut left_s = 0.0;
        let mut left_q = 0.0;
        for &r in rows {
            if x[r as usize][feature] <= threshold {
                let d = y[r as usize] - mean;
                nl += 1.0;
                left_s += d;
                left_q += d * d;
            }
        }
        let nr = n - nl;
        debug_assert!(nl > 0.0 && nr > 0.0);
        let right_s = total_s - left_s;
        let right_q = total_q - left_q;
        let decrease =
            sse_parent - (left_q - left_s * left_s / nl) - (right_q - right_s * right_s / nr);
        if decrease > 0.0 && best.map_or(true, |b| decrease > b.decrease) {
            best = Some(SplitCandidate {
                feature,
                threshold,
                decrease,
            });
        }
    }
    best
}

/// Fit a single CART tree with exhaustive split search.
pub fn fit_cart(x: &[[f64; N_BANDS]], y: &[f64], params: &TreeParams) -> Result<TreeNode> {
    params.validate()?;
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "feature rows ({}) and targets ({}) differ",
            x.len(),
            y.len()
        )));
    }
    let rows: Vec<u32> = (0..x.len() as u32).collect();
    grow_tree(x, y, &rows, params, &mut SplitStrategy::Exhaustive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn xy(pairs: &[(f64, f64)]) -> (Vec<[f64; N_BANDS]>, Vec<f64>) {
        let x = pairs
            .iter()
            .map(|&(v, _)| [v, 0.1, 0.1, 0.1, 0.1, 0.1])
            .collect();
        let y = pairs.iter().map(|&(_, t)| t).collect();
        (x, y)
    }

    #[test]
    fn single_split_on_obvious_step() {
        let (x, y) = xy(&[(1.0, 1.0), (2.0, 1.0), (3.0, 5.0), (4.0, 5.0)]);
        let rows: Vec<u32> = (0..4).collect();
        let split = find_best_split(&x, &y, &rows, &[0, 1, 2, 3, 4, 5], 2)
            .unwrap()
            .unwrap();
        assert_eq!(split.feature, 0);
        assert_eq!(split.threshold, 2.5);
        // decrease: parent SSE = 16 (mean 3), children pure => 16.
        assert!((split.decrease - 16.0).abs() < 1e-12);
    }

    #[test]
    fn constant_target_has_no_split() {
        let (x, y) = xy(&[(1.0, 2.0), (2.0, 2.0), (3.0, 2.0)]);
        let rows: Vec<u32> = (0..3).collect();
        let split = find_best_split(&x, &y, &rows, &[0], 2).unwrap();
        assert!(split.is_none());
    }

    #[test]
    fn constant_features_have_no_split() {
        let x = vec![[0.5; N_BANDS]; 4];
        let y = vec![1.0, 2.0, 3.0, 4.0];
        let rows: Vec<u32> = (0..4).collect();
        let split = find_best_split(&x, &y, &rows, &[0, 1, 2, 3, 4, 5], 2).unwrap();
        assert!(split.is_none());
    }

    #[test]
    fn empty_feature_set_is_argument_error() {
        let (x, y) = xy(&[(1.0, 1.0), (2.0, 2.0)]);
        let err = find_best_split(&x, &y, &[0, 1], &[], 2).unwrap_err();
        assert_eq!(err.class(), "argument");
    }

    #[test]
    fn tie_breaks_to_lowest_feature_then_threshold() {
        // Feature 0 and feature 1 both separate perfectly; feature 0 wins.
        let x = vec![
            [1.0, 10.0, 0.1, 0.1, 0.1, 0.1],
            [2.0, 20.0, 0.1, 0.1, 0.1, 0.1],
        ];
        let y = vec![1.0, 3.0];
        let split = find_best_split(&x, &y, &[0, 1], &[0, 1, 2, 3, 4, 5], 2)
            .unwrap()
            .unwrap();
        assert_eq!(split.feature, 0);
        assert_eq!(split.threshold, 1.5);
    }

    #[test]
    fn memorizes_distinct_rows_at_full_depth() {
        let mut rng = crate::rng::shuffle_rng(21);
        let x: Vec<[f64; N_BANDS]> = (0..64)
            .map(|_| std::array::from_fn(|_| rng.gen_range(0.0..1.0)))
            .collect();
        let y: Vec<f64> = (0..64).map(|i| (i as f64).sin() + 2.0).collect();
        let tree = fit_cart(&x, &y, &TreeParams::default()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(tree.predict(xi), *yi);
        }
    }

    #[test]
    fn max_depth_zero_is_a_single_leaf_with_mean() {
        let (x, y) = xy(&[(1.0, 1.0), (2.0, 2.0), (3.0, 6.0)]);
        let params = TreeParams {
            max_depth: Some(0),
            min_samples_split: 2,
        };
        let tree = fit_cart(&x, &y, &params).unwrap();
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.predict(&x[0]), 3.0);
    }

    #[test]
    fn max_depth_one_allows_one_level() {
        let (x, y) = xy(&[(1.0, 1.0), (2.0, 2.0), (3.0, 6.0), (4.0, 7.0)]);
        let params = TreeParams {
            max_depth: Some(1),
            min_samples_split: 2,
        };
        let tree = fit_cart(&x, &y, &params).unwrap();
        assert!(tree.depth() <= 1);
        assert!(matches!(tree, TreeNode::Split { .. }));
    }

    #[test]
    fn min_samples_split_stops_growth() {
        let (x, y) = xy(&[(1.0, 1.0), (2.0, 2.0), (3.0, 6.0)]);
        let params = TreeParams {
            max_depth: None,
            min_samples_split: 4,
        };
        let tree = fit_cart(&x, &y, &params).unwrap();
        assert_eq!(tree.node_count(), 1);
    }

    #[test]
    fn min_samples_split_below_two_rejected() {
        let (x, y) = xy(&[(1.0, 1.0), (2.0, 2.0)]);
        let params = TreeParams {
            max_depth: None,
            min_samples_split: 1,
        };
        assert_eq!(fit_cart(&x, &y, &params).unwrap_err().class(), "argument");
    }

    #[test]
    fn duplicated_rows_weight_the_leaf_mean() {
        // Row 0 twice, row 1 once: leaf means must reflect multiplicity.
        let (x, y) = xy(&[(1.0, 1.0), (2.0, 4.0)]);
        let rows = vec![0, 0, 1];
        let mut strategy = SplitStrategy::Exhaustive;
        let tree = grow_tree(&x, &y, &rows, &TreeParams::default(), &mut strategy).unwrap();
        assert_eq!(tree.predict(&x[0]), 1.0);
        assert_eq!(tree.predict(&x[1]), 4.0);
        // With no allowed split the weighted mean appears.
        let stump = grow_tree(
            &x,
            &y,
            &rows,
            &TreeParams {
                max_depth: Some(0),
                min_samples_split: 2,
            },
            &mut SplitStrategy::Exhaustive,
        )
        .unwrap();
        assert_eq!(stump.predict(&x[0]), 2.0); // (1 + 1 + 4) / 3
    }

    #[test]
    fn threshold_guard_keeps_partition_consistent() {
        // Adjacent floats: the midpoint rounds to one of them.
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = split_threshold(lo, hi);
        assert!(lo <= t && t < hi);
        let (x, y) = xy(&[(lo, 1.0), (hi, 2.0)]);
        let tree = fit_cart(&x, &y, &TreeParams::default()).unwrap();
        assert_eq!(tree.predict(&x[0]), 1.0);
        assert_eq!(tree.predict(&x[1]), 2.0);
    }
}
