//! Counter-indexed random streams.
//!
//! Every window owns two ChaCha8 streams keyed by `(seed, window)`: one for
//! the beamsplitter stage and one for detection. Nothing depends on which
//! thread runs a window or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Which half of a window's randomness is wanted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Emission = 0,
    Detection = 1,
}

pub fn window_rng(seed: u64, window: u64, stage: Stage) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(window.wrapping_mul(2).wrapping_add(stage as u64));
    rng
}

/// Independent seed for the `index`-th run of a sweep (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (z ^ (z >> 31)) & (u64::MAX >> 1)
}
