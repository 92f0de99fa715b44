//! Seeded random streams.
//!
//! One root seed feeds several independent ChaCha streams so that, for
//! example, a policy drawing more random numbers never shifts the
//! environment's draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub const STREAM_INIT: u64 = 0;
pub const STREAM_DYNAMICS: u64 = 1;
pub const STREAM_POLICY: u64 = 2;

pub fn stream(seed: u64, id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Index drawn from a probability vector. Trailing rounding mass falls on
/// the last index with positive probability.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}
