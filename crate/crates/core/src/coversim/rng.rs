//! Counter-based uniforms keyed by `(seed, stream, index)`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream of the uniforms that place the interval centers.
pub const STREAM_CENTERS: u64 = 0;
/// Stream of the marks `eps_j` in the coupled model.
pub const STREAM_MARKS: u64 = 1;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` in a run with base seed `base`.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

#[inline]
fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniforms `u_1, u_2, ...` on `[0, 1)`; `u_n` depends only on the key and `n`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    rng: ChaCha8Rng,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        let mut z = seed;
        for chunk in key.chunks_exact_mut(8) {
            z = splitmix64(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        Self { rng }
    }

    /// The next uniform in index order.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        to_unit(self.rng.next_u64())
    }

    /// `u_n` for `n >= 1`, independent of the current position.
    pub fn uniform_at(&self, n: u64) -> f64 {
        let mut r = self.rng.clone();
        r.set_word_pos(2 * u128::from(n - 1));
        to_unit(r.next_u64())
    }
}
