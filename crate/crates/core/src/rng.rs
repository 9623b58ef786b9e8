//! Keyed random streams.
//!
//! Every random draw in a simulation comes from a ChaCha stream whose key is
//! derived from `(master_seed, point, trial, tag)`, so a given trial sees the
//! same numbers regardless of how trials are distributed over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Draw tags separating independent uses within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum DrawTag {
    Symbol = 1,
    Fading = 2,
    Noise = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for one `(point, trial, tag)` triple under `master_seed`.
pub fn stream(master_seed: u64, point: u64, trial: u64, tag: DrawTag) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    let words = [
        splitmix64(master_seed),
        splitmix64(master_seed ^ splitmix64(point.wrapping_add(0x1000))),
        splitmix64(trial ^ splitmix64(point)),
        splitmix64(tag as u64 ^ splitmix64(trial.rotate_left(17))),
    ];
    for (chunk, w) in seed.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
