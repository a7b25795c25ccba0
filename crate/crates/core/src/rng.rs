//! Counter-keyed random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream selected by
//! `(seed, domain, index)`, so a trial, a matrix row or a sample block can be
//! regenerated in isolation and parallel runs match serial runs exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Separates the streams of unrelated consumers sharing one user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    SignRows = 1,
    Moments = 2,
    ExripTrials = 3,
    MmvTrials = 4,
    SearchAttempts = 5,
    Presets = 6,
}

/// Returns the stream for `index` within `domain` under `seed`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Derives a child seed, e.g. the seed of one attempt in a best-of-N search.
pub fn derive_seed(seed: u64, domain: Domain, index: u64) -> u64 {
    // splitmix64 finalizer over a domain-tagged counter
    let mut z = seed
        ^ (domain as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93)
        ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
