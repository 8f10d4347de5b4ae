//! Reproducible index shuffling.
//!
//! Generator: xoshiro256** seeded from a 64-bit value through SplitMix64.
//! Bounded integers use rejection sampling on the full 64-bit output
//! (`zone = 2^64 - (2^64 mod bound)`, accept `x < zone`, return `x mod bound`).
//! Permutations use the descending Fisher–Yates walk: for `i = n-1 .. 1`,
//! swap `i` with `below(i + 1)`. Any implementation following these three
//! rules reproduces the same splits and fold assignments.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

/// Seeded generator used for every split, fold assignment and synthetic draw.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: Xoshiro256StarStar,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX - bound + 1) % bound;
        loop {
            let x = self.inner.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }

    /// Uniformly random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(i as u64 + 1) as usize;
            idx.swap(i, j);
        }
        idx
    }

    /// Borrow as a `rand` generator for distribution sampling.
    pub fn as_rng(&mut self) -> &mut Xoshiro256StarStar {
        &mut self.inner
    }
}

/// Deterministic per-stream seed derivation (SplitMix64 finalizer of `seed ^ stream`).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = (seed ^ stream).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
