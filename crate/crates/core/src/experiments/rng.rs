//! Counter-style random streams: every draw is keyed by
//! `(seed, experiment, draw index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Generator for draw `index` of `experiment` under `seed`. The ChaCha key is
/// `sha256(seed ‖ experiment)` and the stream number is the draw index, so
/// draws are independent of evaluation order.
pub fn derive_rng(seed: u64, experiment: &str, index: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(experiment.as_bytes());
    let key: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// A 64-bit seed for draw `index`, for APIs that take a plain seed.
pub fn derive_seed(seed: u64, experiment: &str, index: u64) -> u64 {
    use rand::RngCore;
    derive_rng(seed, experiment, index).next_u64()
}
