//! Seed derivation.
//!
//! Every random stream in the workbench descends from one root seed. A child
//! seed is `splitmix64(root ^ fnv1a64(role))`, and indexed children hash the
//! decimal index into the role (`"read/17"`). The derivation is stable across
//! platforms and releases, so seeds written to manifests stay meaningful.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn derive(root: u64, role: &str) -> u64 {
    splitmix64(root ^ fnv1a64(role.as_bytes()))
}

pub fn derive_indexed(root: u64, role: &str, index: u64) -> u64 {
    derive(root, &format!("{role}/{index}"))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
