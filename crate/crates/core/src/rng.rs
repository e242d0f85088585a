//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator (counter based, 64-bit seed). Streams
//! for independent replications are derived as `seed ^ splitmix64(index)`, so
//! replication `r` is reproducible without running replications `0..r`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type StreamRng = ChaCha8Rng;

/// One round of the SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th derived stream.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed ^ splitmix64(index)
}

/// Seed of sub-stream `index` of an already derived stream. The parent is
/// mixed first, so nested derivations never commute.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    derive_seed(splitmix64(seed), index)
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fill `out` with i.i.d. standard normal draws.
pub fn fill_standard_normal(rng: &mut StreamRng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}
