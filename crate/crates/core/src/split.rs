//! Seeded train/test splitting.
//!
//! The sampling protocol is a seeded Fisher–Yates shuffle of the row indices
//! (ChaCha8 stream 0, see [`crate::rng`]) followed by taking the first
//! `floor(train_frac * N)` rows as the training set and the next
//! `floor(test_frac * N)` rows as the test set. Remaining rows are discarded.
//! The same `(table, fractions, seed)` always yields the same split on every
//! platform.

use crate::error::{Error, Result};
use crate::rng;
use crate::sample::SampleTable;

/// Result of [`split_train_test`], carrying its provenance.
#[derive(Debug, Clone)]
pub struct TrainTestSplit {
    pub train: SampleTable,
    pub test: SampleTable,
    pub seed: u64,
    pub train_frac: f64,
    pub test_frac: f64,
}

/// Split `table` into disjoint train/test subsets.
///
/// Requirements: every row must carry a chlorophyll value and satisfy the
/// sample validity rule; both fractions must lie in [0, 1] and sum to at most
/// 1. Violations raise argument errors.
pub fn split_train_test(
    table: &SampleTable,
    train_frac: f64,
    test_frac: f64,
    seed: u64,
) -> Result<TrainTestSplit> {
    for frac in [("train_frac", train_frac), ("test_frac", test_frac)] {
        if !(0.0..=1.0).contains(&frac.1) || !frac.1.is_finite() {
            return Err(Error::Argument(format!(
                "{} must lie in [0, 1], got {}",
                frac.0, frac.1
            )));
        }
    }
    if train_frac + test_frac > 1.0 {
        return Err(Error::Argument(format!(
            "train_frac + test_frac must not exceed 1, got {train_frac} + {test_frac}"
        )));
    }
    table.check_valid()?;
    if table.rows.iter().any(|s| s.chl.is_none()) {
        return Err(Error::Argument(
            "every row of a split table must carry a chl_a value".into(),
        ));
    }

    let n = table.len();
    let mut order: Vec<usize> = (0..n).collect();
    rng::fisher_yates(&mut order, &mut rng::shuffle_rng(seed));

    let n_train = (train_frac * n as f64).floor() as usize;
    let n_test = (test_frac * n as f64).floor() as usize;
    let pick = |slice: &[usize]| SampleTable {
        band_names: table.band_names.clone(),
        rows: slice.iter().map(|&i| table.rows[i]).collect(),
    };
    Ok(TrainTestSplit {
        train: pick(&order[..n_train]),
        test: pick(&order[n_train..n_train + n_test]),
        seed,
        train_frac,
        test_frac,
    })
}
