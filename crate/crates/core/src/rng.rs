//! Counter-based random streams: every draw is addressed by
//! `(global seed, stream name, index)`, so parallel evaluation order never
//! changes what is drawn.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes.into_iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn stream(seed: u64, name: &str, index: u64) -> ChaCha8Rng {
    let key = fnv1a(seed.to_le_bytes().into_iter().chain(name.bytes()));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Stream index for sample `sample` of trial `trial`.
pub fn trial_sample(trial: u32, sample: u32) -> u64 {
    (u64::from(trial) << 32) | u64::from(sample)
}
