//! Helpers shared by unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{BinaryVolume, Dims};

pub fn random_binary(dims: Dims, density: f64, seed: u64) -> BinaryVolume {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BinaryVolume::from_fn(dims, |_, _, _| rng.gen_bool(density))
}

/// Flags of a few random solid boxes.
pub fn random_boxes(dims: Dims, count: usize, max_extent: u32, seed: u64) -> BinaryVolume {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boxes: Vec<([u32; 3], [u32; 3])> = (0..count)
        .map(|_| {
            let lo: [u32; 3] = std::array::from_fn(|a| rng.gen_range(0..dims[a]));
            let hi = std::array::from_fn(|a| (lo[a] + rng.gen_range(1..=max_extent)).min(dims[a]));
            (lo, hi)
        })
        .collect();
    BinaryVolume::from_fn(dims, |x, y, z| {
        boxes.iter().any(|(lo, hi)| {
            let p = [x, y, z];
            (0..3).all(|a| lo[a] <= p[a] && p[a] < hi[a])
        })
    })
}
