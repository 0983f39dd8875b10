//! Seed splitting.
//!
//! A run owns one root seed. Every consumer of randomness asks for its own
//! named stream, optionally further keyed by indices (iteration, model), so
//! adding a consumer never shifts the numbers another consumer sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    InitialDesign,
    InnerOptimizer,
    Selector,
    PriorTargets,
    MapElites,
    Replicate,
    Synthetic,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::InitialDesign => 0x1001,
            Stream::InnerOptimizer => 0x1002,
            Stream::Selector => 0x1003,
            Stream::PriorTargets => 0x1004,
            Stream::MapElites => 0x1005,
            Stream::Replicate => 0x1006,
            Stream::Synthetic => 0x1007,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministically mixes a root seed with a stream tag and index path.
pub fn derive_seed(root: u64, stream: Stream, indices: &[u64]) -> u64 {
    let mut h = splitmix64(root ^ splitmix64(stream.tag()));
    for &i in indices {
        h = splitmix64(h ^ splitmix64(i.wrapping_add(0x5851_F42D_4C95_7F2D)));
    }
    h
}

/// Root seed holder handing out independent generators.
#[derive(Clone, Copy, Debug)]
pub struct Streams {
    root: u64,
}

impl Streams {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        self.rng_at(stream, &[])
    }

    pub fn rng_at(&self, stream: Stream, indices: &[u64]) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.root, stream, indices))
    }
}
