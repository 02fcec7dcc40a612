//! Seeded uniform stream.
//!
//! The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`). A seed
//! is expanded into a 256-bit key by `SeedableRng::seed_from_u64`, and
//! uniforms are the top 53 bits of each 64-bit output scaled by `2⁻⁵³`, so
//! every value is a multiple of `2⁻⁵³` in `[0, 1)`.
//!
//! Worker streams for parallel sampling share the master key and use the
//! worker index as the ChaCha stream id, so distinct workers read disjoint
//! keystreams.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNIT_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
    drawn: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
            drawn: 0,
        }
    }

    /// Independent stream for worker `index` under `master_seed`.
    ///
    /// Worker 0 is not the same stream as `RngStream::new(master_seed)`.
    pub fn for_worker(master_seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        // stream 0 is the single-stream sequence
        inner.set_stream(index.wrapping_add(1));
        Self {
            seed: master_seed,
            inner,
            drawn: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of uniforms drawn so far.
    pub fn drawn(&self) -> u64 {
        self.drawn
    }

    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        self.drawn += 1;
        (self.inner.next_u64() >> 11) as f64 * UNIT_SCALE
    }
}

impl Iterator for RngStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_uniform())
    }
}
