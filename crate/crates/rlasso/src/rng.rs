//! Seeded randomness.
//!
//! All generators in this crate draw from SplitMix64, a counter-based 64-bit
//! generator: the k-th output is a fixed bijective hash of `seed + k * GAMMA`.
//! Streams for parallel trials are derived as `seed XOR trial_index`, so
//! results never depend on thread scheduling.

use rand::RngCore;
use serde::{Deserialize, Serialize};

/// Seed for every randomized operation in the crate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Derives the disjoint per-trial stream `seed XOR k`.
    pub fn stream(self, k: u64) -> RngSeed {
        RngSeed(self.0 ^ k)
    }
}

/// SplitMix64 (Steele, Lea & Flood 2014).
pub struct SplitMix64 {
    state: u64,
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

impl SplitMix64 {
    pub fn new(seed: RngSeed) -> Self {
        SplitMix64 { state: seed.0 }
    }
}

impl RngCore for SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        let mut chunks = dest.chunks_exact_mut(8);
        for chunk in &mut chunks {
            chunk.copy_from_slice(&self.next_u64().to_le_bytes());
        }
        let rem = chunks.into_remainder();
        if !rem.is_empty() {
            let bytes = self.next_u64().to_le_bytes();
            rem.copy_from_slice(&bytes[..rem.len()]);
        }
    }
}
