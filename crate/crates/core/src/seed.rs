//! Seed derivation. Every randomized step draws from a ChaCha stream whose
//! seed is derived from the run seed plus a tag naming the step, so adding a
//! new consumer never perturbs existing streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chem::StableHasher;

pub type Rng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 20150206;

pub fn derive(seed: u64, tag: &str, index: u64) -> u64 {
    let mut h = StableHasher::new();
    h.write_u64(seed);
    h.write_bytes(tag.as_bytes());
    h.write_u64(index);
    h.finish()
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_for(seed: u64, tag: &str, index: u64) -> Rng {
    rng(derive(seed, tag, index))
}
