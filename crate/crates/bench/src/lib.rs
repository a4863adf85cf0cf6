//! Fixed-seed inputs shared by the benchmarks.

use niven_core::{sample_s, DigitString, SClassParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_digits(g: u32, len: usize, seed: u64) -> DigitString {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..g)).collect();
    digits[len - 1] = rng.gen_range(1..g);
    DigitString::new(g, digits).unwrap()
}

/// A member of the pipeline class at base 2 with `len` digits.
pub fn pipeline_input(len: usize, r_prime: u64, seed: u64) -> DigitString {
    let params = SClassParams::pipeline(r_prime, 2);
    sample_s(&params, len, &mut ChaCha8Rng::seed_from_u64(seed), 1_000).unwrap()
}

/// A random subset of `F_p` with `size` elements, ascending.
pub fn random_subset(p: u64, size: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = rand::seq::index::sample(&mut rng, p as usize, size)
        .into_iter()
        .map(|i| i as u64)
        .collect::<Vec<_>>();
    set.sort_unstable();
    set
}
