//! Reproducible random streams.
//!
//! A stream is a ChaCha8 generator keyed by a 64-bit seed with a 64-bit
//! stream selector. ChaCha output depends only on key, stream and word
//! position, so a given `(seed, stream_id)` yields the same sequence on every
//! platform. Parallel Monte Carlo work derives one substream per task index
//! and merges results by index, which keeps outputs independent of thread
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// The `index`-th child stream. Children of distinct parents use distinct
    /// keys, so nesting never aliases.
    pub fn substream(&self, index: u64) -> RngStream {
        RngStream {
            seed: splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0xA5A5_A5A5))),
            stream_id: index,
        }
    }
}
