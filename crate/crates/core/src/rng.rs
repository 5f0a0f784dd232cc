//! Counter-based random streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha stream keyed by
//! `(seed, domain)` and indexed by the trial number, so results do not depend
//! on how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator type used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Factory of independent, reproducible sub-streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Streams {
    key: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self {
            key: splitmix(seed),
        }
    }

    /// A derived factory for a named sub-experiment.
    pub fn domain(&self, tag: u64) -> Self {
        Self {
            key: splitmix(self.key ^ splitmix(tag.wrapping_add(0x51ed_270b))),
        }
    }

    /// The generator for trial `index`.
    pub fn rng(&self, index: u64) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.key);
        rng.set_stream(index);
        rng
    }
}
