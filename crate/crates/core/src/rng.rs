//! Deterministic RNG stream derivation.
//!
//! Every random quantity in a drop is drawn from a stream keyed by
//! `(master_seed, drop_index, purpose, ids...)`. Keying per link rather than
//! drawing sequentially keeps realizations identical across scenario variants
//! that need different subsets of links (common random numbers), and makes
//! results independent of evaluation order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream purposes. Distinct tags keep streams for different quantities apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Topology = 1,
    Link = 2,
    BsMount = 3,
    UeMount = 4,
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a master seed and a list of keys into one 64-bit seed.
pub fn derive_seed(master_seed: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(mix64(master_seed), |acc, &k| mix64(acc ^ mix64(k)))
}

/// RNG for one purpose within one drop, further keyed by `ids`.
pub fn stream_rng(master_seed: u64, drop_index: u64, stream: Stream, ids: &[u64]) -> ChaCha8Rng {
    let mut keys = Vec::with_capacity(ids.len() + 2);
    keys.push(drop_index);
    keys.push(stream as u64);
    keys.extend_from_slice(ids);
    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, &keys))
}
