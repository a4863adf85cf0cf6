//! The classes `S_{q,r}`: digit sum `≡ r (mod q)` plus condition (S2).

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digits::DigitString;
use crate::numtheory::{find_prime_triple_above, square_part};

use super::triple_floor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SClassParams {
    pub q: u64,
    pub r: i64,
    pub g: u32,
}

impl SClassParams {
    pub fn new(q: u64, r: i64, g: u32) -> Self {
        assert!(q >= 1, "q must be positive");
        SClassParams { q, r, g }
    }

    /// `r` reduced into `[0, q)`.
    pub fn residue(&self) -> u64 {
        self.r.rem_euclid(self.q as i64) as u64
    }

    /// Parameters used by the pipeline: `q = 420`, `r = r' + 18g`.
    pub fn pipeline(r_prime: u64, g: u32) -> Self {
        SClassParams::new(420, (r_prime + 18 * g as u64) as i64, g)
    }
}

/// (S1) and (S2).
pub fn is_in_s(n: &DigitString, params: &SClassParams) -> bool {
    n.digit_sum() % params.q == params.residue() && n.s2_scan()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("length must be at least 1")]
    EmptyLength,
    #[error("base {0} is smaller than 2")]
    InvalidBase(u32),
    #[error("no member of S found in {draws} draws")]
    BudgetExhausted { draws: usize },
}

/// Draws a member of `S_{q,r}` with `len` digits.
///
/// Digits are uniform with a nonzero top digit. The digit sum is then raised
/// to the required class by topping up low digits (lowest first), and the
/// draw is rejected and repeated if (S2) fails.
pub fn sample_s<R: Rng + ?Sized>(
    params: &SClassParams,
    len: usize,
    rng: &mut R,
    max_draws: usize,
) -> Result<DigitString, SampleError> {
    if len == 0 {
        return Err(SampleError::EmptyLength);
    }
    let g = params.g;
    if g < 2 {
        return Err(SampleError::InvalidBase(g));
    }
    let q = params.q;
    for _ in 0..max_draws {
        let mut digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..g)).collect();
        digits[len - 1] = rng.gen_range(1..g);
        let sum: u64 = digits.iter().map(|&d| d as u64).sum();
        let mut missing = (params.residue() + q - sum % q) % q;
        for d in digits.iter_mut() {
            if missing == 0 {
                break;
            }
            let add = ((g - 1 - *d) as u64).min(missing);
            *d += add as u32;
            missing -= add;
        }
        if missing > 0 {
            continue;
        }
        let n = DigitString::new(g, digits).expect("digits drawn in range");
        if n.s2_scan() {
            debug_assert!(is_in_s(&n, params));
            return Ok(n);
        }
    }
    Err(SampleError::BudgetExhausted { draws: max_draws })
}

/// How often the prime-triple search succeeded for `s' ≡ residue (mod 420)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueScore {
    pub residue: u64,
    pub successes: usize,
    pub trials: usize,
}

impl ResidueScore {
    pub fn admissible(&self) -> bool {
        self.trials > 0 && self.successes == self.trials
    }
}

/// Scans residues `r'` modulo 420 and, for each, runs the guaranteed-mode
/// triple search on `samples` values of `s' ≡ r'` starting near `magnitude`.
///
/// This stands in for the admissible residue set, which is not known
/// explicitly: a residue is reported admissible when every sample succeeded.
pub fn calibrate_residues(g: u32, magnitude: u64, samples: usize) -> Vec<ResidueScore> {
    use rayon::prelude::*;
    const Q: u64 = 420;
    let g0 = square_part(g as u64).g0;
    let floor = triple_floor(g);
    let base = magnitude - magnitude % Q;
    (0..Q)
        .into_par_iter()
        .map(|residue| {
            let successes = (0..samples as u64)
                .filter(|k| find_prime_triple_above(base + residue + k * Q, g0, floor).is_some())
                .count();
            ResidueScore { residue, successes, trials: samples }
        })
        .collect()
}

/// First admissible odd residue from [`calibrate_residues`].
pub fn default_residue(g: u32, magnitude: u64, samples: usize) -> Option<u64> {
    calibrate_residues(g, magnitude, samples)
        .into_iter()
        .find(|score| score.residue % 2 == 1 && score.admissible())
        .map(|score| score.residue)
}
