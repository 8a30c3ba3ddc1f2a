//! Counter-based random streams: stream `index` under `(seed, tag)` is the
//! same no matter which worker draws it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds labels into a stream tag.
pub fn tag(parts: &[u64]) -> u64 {
    parts.iter().fold(0x6d69_6c6e_6f72_u64, |acc, &p| splitmix(acc ^ p))
}

pub fn stream(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed) ^ tag);
    rng.set_stream(index);
    rng
}
