//! Counter-based random stream.
//!
//! Every draw is addressed by `(seed, stream, index)`: the underlying ChaCha8
//! block function is keyed by the seed, the nonce selects the stream, and the
//! word position is the draw counter. A sampler that consumes a fixed number
//! of draws per trial can therefore jump straight to trial `i`, which makes
//! sharded runs reproduce the sequential run bit for bit regardless of how
//! many shards are used.

use std::ops::Range;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// ChaCha word positions are 32-bit; one draw is one `u64`.
const WORDS_PER_DRAW: u128 = 2;

#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
}

impl RandomStream {
    /// Stream 0 of `seed`, positioned at draw 0.
    pub fn new(seed: u64) -> Self {
        Self::at(seed, 0, 0)
    }

    /// Stream `stream` of `seed`, positioned at draw `draw`.
    pub fn at(seed: u64, stream: u64, draw: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng.set_word_pos(draw as u128 * WORDS_PER_DRAW);
        Self { rng, seed, stream }
    }

    /// An independent stream sharing this stream's seed, positioned at draw 0.
    pub fn split(&self, stream: u64) -> Self {
        Self::at(self.seed, stream, 0)
    }

    pub fn seek(&mut self, draw: u64) {
        self.rng.set_word_pos(draw as u128 * WORDS_PER_DRAW);
    }

    /// Index of the next draw.
    pub fn position(&self) -> u64 {
        (self.rng.get_word_pos() / WORDS_PER_DRAW) as u64
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[-1, 1)`.
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }

    /// Fair coin; consumes exactly one draw.
    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }
}

/// Splits `0..n` into `shards` contiguous, nearly equal ranges.
pub fn shard_ranges(n: u64, shards: usize) -> Vec<Range<u64>> {
    let shards = shards.max(1) as u64;
    let base = n / shards;
    let extra = n % shards;
    let mut start = 0;
    (0..shards)
        .map(|k| {
            let len = base + u64::from(k < extra);
            let range = start..start + len;
            start += len;
            range
        })
        .collect()
}

/// Default shard count: one per worker thread.
pub fn default_shards() -> usize {
    rayon::current_num_threads()
}
