//! Deterministic, independently keyed random streams.
//!
//! A stream is a ChaCha8 keystream. The 256-bit key is expanded from the
//! master seed (plus an optional key path) with SplitMix64, and the stream
//! index selects one of the 2^64 ChaCha streams under that key. Any stream
//! can be constructed directly from its coordinates, so replications can run
//! in any order on any number of threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A reproducible pseudo-random stream addressed by `(seed, key path, index)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    /// Stream `index` under `seed`.
    pub fn new(seed: u64, index: u64) -> Self {
        Self::keyed(seed, &[], index)
    }

    /// Stream `index` under a key derived from `seed` and a path of
    /// discriminators (grid cell, purpose tag, ...).
    pub fn keyed(seed: u64, path: &[u64], index: u64) -> Self {
        let mut state = seed;
        for &part in path {
            // fold each path element through a full mixing round
            state = splitmix64(&mut state) ^ part;
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(index);
        Self { inner }
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
