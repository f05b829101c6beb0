//! Counter-based random streams.
//!
//! Every edge weight is a pure function of `(seed, edge)`: the ChaCha key is
//! derived from the seed, the stream id from the column `x`, and the word
//! position from `(y, axis)`. Sampling order, region size and thread count
//! therefore never change a weight.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::lattice::{Axis, EdgeId};

const COORD_OFFSET: i64 = 1 << 31;
/// 32-bit words consumed per vertex: one `u64` per axis.
const WORDS_PER_VERTEX: u128 = 4;

#[inline]
fn column_stream(x: i32) -> u64 {
    (x as i64 + COORD_OFFSET) as u64
}

#[inline]
fn word_position(y: i32, axis: Axis) -> u128 {
    let axis_words = match axis {
        Axis::Horizontal => 0,
        Axis::Vertical => 2,
    };
    (y as i64 + COORD_OFFSET) as u128 * WORDS_PER_VERTEX + axis_words
}

/// Map 64 random bits to the open interval (0, 1).
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Keyed per-edge uniform variates.
#[derive(Clone, Debug)]
pub struct EdgeStream {
    rng: ChaCha8Rng,
}

impl EdgeStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Uniform variate attached to a single edge.
    pub fn uniform(&mut self, e: EdgeId) -> f64 {
        self.rng.set_stream(column_stream(e.base.x));
        self.rng.set_word_pos(word_position(e.base.y, e.axis));
        open_unit(self.rng.next_u64())
    }

    /// Uniform variates for the horizontal and vertical edges based at
    /// `(x, y)` for `y` in `y_start..y_start + len`, in order. Equivalent to
    /// calling [`EdgeStream::uniform`] per edge, but reads the column
    /// sequentially.
    pub fn column(&mut self, x: i32, y_start: i32, len: usize, mut sink: impl FnMut(usize, f64, f64)) {
        self.rng.set_stream(column_stream(x));
        self.rng.set_word_pos(word_position(y_start, Axis::Horizontal));
        for i in 0..len {
            let h = open_unit(self.rng.next_u64());
            let v = open_unit(self.rng.next_u64());
            sink(i, h, v);
        }
    }
}

/// Seed of replicate `replicate` at size `n`, derived from the master seed.
pub fn replicate_seed(master_seed: u64, n: u32, replicate: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(n as u64);
    rng.set_word_pos(replicate as u128 * 2);
    rng.next_u64()
}
