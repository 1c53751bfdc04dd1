//! Seed derivation shared by every randomized component.
//!
//! All randomness in the crate flows through [`derive_seed`] and
//! [`stream_rng`]: a master seed plus a structural salt (tree index, fold
//! index, restart number, ...) fully determines every pseudo-random draw.
//! Parallel and sequential execution therefore produce identical artifacts.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives an independent child seed from a master seed and a salt.
///
/// SplitMix64 finalizer over the xor of the inputs; cheap and well mixed.
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    let mut z = master ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 generator on an independent stream of the given seed.
///
/// Stream separation keeps per-unit generators (one per tree, per fold, per
/// restart) independent without re-seeding arithmetic at call sites.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
