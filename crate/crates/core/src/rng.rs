//! Seed derivation for independent, reproducible random streams.
//!
//! Every realization `r` of a Monte Carlo run draws from streams that depend
//! only on `(master_seed, r, purpose)`, never on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for inside one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Wind = 0,
    Temperature = 1,
    Load = 2,
    Fixture = 3,
}

const PURPOSES: u64 = 4;

/// Seed of realization `index` under `master_seed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RealizationSeed {
    pub master: u64,
    pub index: u64,
}

impl RealizationSeed {
    pub fn new(master: u64, index: u64) -> Self {
        RealizationSeed { master, index }
    }

    pub fn stream(&self, purpose: Purpose) -> StreamRng {
        stream(self.master, self.index * PURPOSES + purpose as u64)
    }
}

/// ChaCha8 keyed by `seed`, positioned on stream `id`.
pub fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
