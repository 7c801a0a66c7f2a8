//! Deterministic random number generation.
//!
//! Everything random in this crate flows through ChaCha8 generators created
//! here, so results are bit-reproducible across platforms and across degrees
//! of parallelism for a given `Cargo.lock`. ChaCha8 is a portable, explicitly
//! specified stream cipher; `rand_chacha` guarantees identical output on all
//! targets.
//!
//! Stream map (one logical purpose per ChaCha stream, same 64-bit seed):
//!
//! | stream      | purpose                                    |
//! |-------------|--------------------------------------------|
//! | `0`         | row shuffles (train/test splitting)        |
//! | `1 + t`     | ensemble member `t` (bootstrap, features, thresholds) |
//! | `100`       | synthetic benchmark sample generator       |
//!
//! Distinct streams of the same seed are independent, so e.g. the benchmark
//! generator never shares a random sequence with the split shuffle even when
//! both are driven by the same user-facing seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used for row shuffles.
const STREAM_SHUFFLE: u64 = 0;
/// First stream used for ensemble members; member `t` uses `1 + t`.
const STREAM_TREE_BASE: u64 = 1;
/// Stream used by the synthetic benchmark generator.
const STREAM_SYNTH: u64 = 100;

/// Generator for row shuffles (stream 0).
pub fn shuffle_rng(seed: u64) -> ChaCha8Rng {
    rng_for_stream(seed, STREAM_SHUFFLE)
}

/// Generator for ensemble member `tree_index` (stream `1 + tree_index`).
///
/// Each member draws its bootstrap rows, per-node feature subsets and (for
/// extremely randomized trees) thresholds from its own stream, so members can
/// be fitted concurrently in any order with identical results.
pub fn tree_rng(seed: u64, tree_index: usize) -> ChaCha8Rng {
    rng_for_stream(seed, STREAM_TREE_BASE + tree_index as u64)
}

/// Generator for the synthetic benchmark (stream 100).
pub fn synth_rng(seed: u64) -> ChaCha8Rng {
    rng_for_stream(seed, STREAM_SYNTH)
}

fn rng_for_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// In-place Fisher–Yates shuffle.
///
/// The classic descending-index formulation: for `i` from `n−1` down to `1`,
/// swap `slice[i]` with `slice[j]` for `j` drawn uniformly from `0..=i`.
/// Spelled out here (rather than delegating to `SliceRandom`) so the exact
/// algorithm is pinned by this crate, not by a dependency's internals.
pub fn fisher_yates<T, R: Rng>(slice: &mut [T], rng: &mut R) {
    for i in (1..slice.len()).rev() {
        let j = rng.gen_range(0..=i);
        slice.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_shuffle() {
        let mut a: Vec<u32> = (0..100).collect();
        let mut b: Vec<u32> = (0..100).collect();
        fisher_yates(&mut a, &mut shuffle_rng(7));
        fisher_yates(&mut b, &mut shuffle_rng(7));
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let mut a: Vec<u32> = (0..100).collect();
        let mut b: Vec<u32> = (0..100).collect();
        fisher_yates(&mut a, &mut shuffle_rng(7));
        fisher_yates(&mut b, &mut shuffle_rng(8));
        assert_ne!(a, b);
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut a: Vec<u32> = (0..257).collect();
        fisher_yates(&mut a, &mut shuffle_rng(42));
        let mut sorted = a.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..257).collect::<Vec<_>>());
    }

    #[test]
    fn streams_are_independent() {
        // Same seed, different purposes: sequences must differ.
        let mut s = shuffle_rng(1);
        let mut t = tree_rng(1, 0);
        let mut g = synth_rng(1);
        let a: Vec<u64> = (0..8).map(|_| s.gen()).collect();
        let b: Vec<u64> = (0..8).map(|_| t.gen()).collect();
        let c: Vec<u64> = (0..8).map(|_| g.gen()).collect();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
    }

    #[test]
    fn tree_streams_distinct_per_index() {
        let mut t0 = tree_rng(5, 0);
        let mut t1 = tree_rng(5, 1);
        let a: Vec<u64> = (0..8).map(|_| t0.gen()).collect();
        let b: Vec<u64> = (0..8).map(|_| t1.gen()).collect();
        assert_ne!(a, b);
    }

    #[test]
    fn singleton_and_empty_are_noops() {
        let mut e: [u32; 0] = [];
        fisher_yates(&mut e, &mut shuffle_rng(0));
        let mut one = [9u32];
        fisher_yates(&mut one, &mut shuffle_rng(0));
        assert_eq!(one, [9]);
    }
}
