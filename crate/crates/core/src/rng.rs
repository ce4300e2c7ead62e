//! Counter-based uniform stream: the i-th uniform of a seed is a fixed
//! function of `(seed, i)`, so any partition of the index range across
//! workers yields identical draws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Draws per ChaCha stream. Index `i` lives in stream `i / BLOCK` at word
/// offset `2 * (i % BLOCK)`.
pub const BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformStream {
    seed: u64,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn positioned(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index / BLOCK);
        rng.set_word_pos(2 * u128::from(index % BLOCK));
        rng
    }

    /// Uniform in the open interval (0, 1) at global position `index`.
    pub fn at(&self, index: u64) -> f64 {
        to_open_unit(self.positioned(index).next_u64())
    }

    /// Fills `out` with the uniforms at positions `start..start + out.len()`.
    pub fn fill(&self, start: u64, out: &mut [f64]) {
        let mut index = start;
        let mut rng = self.positioned(index);
        for slot in out.iter_mut() {
            if index % BLOCK == 0 && index != start {
                rng = self.positioned(index);
            }
            *slot = to_open_unit(rng.next_u64());
            index += 1;
        }
    }
}

fn to_open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
