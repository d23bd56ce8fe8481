//! Fixtures shared by the criterion benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform noise in `[-100, 100)`, reproducible per `(n, seed)`.
pub fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
    (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect()
}

/// Prefix of the period-256 ramp.
pub fn saw_prefix(n: usize) -> Vec<f64> {
    let full = wavecode::signal::saw(n.max(256), 256).expect("n is a multiple of 256");
    full[..n].to_vec()
}
