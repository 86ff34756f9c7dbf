//! Seeded randomness.
//!
//! Every random choice goes through ChaCha8 (`rand_chacha` 0.3) seeded with
//! `seed_from_u64`, so a seed reproduces the same output on every platform.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type PipelineRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> PipelineRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` under `seed`.
pub fn seeded_stream(seed: u64, stream: u64) -> PipelineRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Node visiting order for the community detectors: ascending for seed 0,
/// a seeded permutation otherwise.
pub fn sweep_order(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if seed != 0 {
        order.shuffle(&mut seeded(seed));
    }
    order
}
