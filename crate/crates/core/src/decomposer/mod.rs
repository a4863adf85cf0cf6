//! Constructive decomposition into base-g Niven numbers.
//!
//! The pipeline for a number `n` with digit sum `s`:
//!
//! 1. find primes `p1 ≤ p2 ≤ p3` summing to `s' = s - 18g`, each having `g0`
//!    as a primitive root (where `g = g0^(2^u)`),
//! 2. [`split`] the digit string into three blocks with digit sums close to
//!    `p_i + 6g`,
//! 3. reduce each block with [`decompose_part`]: subtract `h_i` distinct powers
//!    of g chosen by a restricted subset sum modulo `p_i`, leaving a number
//!    with digit sum `p_i` that is divisible by `p_i`,
//! 4. [`lift`] the three block certificates back into positions.
//!
//! Every hypothesis the construction relies on is checked at run time and a
//! failure is reported with the stage it happened in.

mod cert;
mod sclass;

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

pub use cert::{verify_cert, DecompositionCert, Method, Provenance, Verdict};
pub use sclass::{
    calibrate_residues, default_residue, is_in_s, sample_s, ResidueScore, SClassParams,
    SampleError,
};

use crate::digits::{DigitError, DigitString};
use crate::numtheory::{find_prime_triple_above, is_prime, is_primitive_root, square_part};
use crate::sumsets::h_subset_sum;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("no digit-sum targets given")]
    NoTargets,
    #[error("digit-sum target {index} is zero")]
    ZeroTarget { index: usize },
    #[error("targets sum to {targets}, but s_g(n) = {digit_sum}")]
    SumMismatch { targets: u64, digit_sum: u64 },
    #[error("last target {last} must exceed (g-2)(v-1) = {bound}")]
    LastTooSmall { last: u64, bound: u64 },
    #[error("cut {index} could not be placed")]
    Construction { index: usize },
}

/// Cut lengths `(ℓ_1 - ℓ_0, …, ℓ_v - ℓ_{v-1})` for [`split`].
pub fn split_lengths(n: &DigitString, targets: &[u64]) -> Result<Vec<usize>, SplitError> {
    let v = targets.len();
    if v == 0 {
        return Err(SplitError::NoTargets);
    }
    if let Some(index) = targets.iter().position(|&t| t == 0) {
        return Err(SplitError::ZeroTarget { index });
    }
    let total: u64 = targets.iter().sum();
    if total != n.digit_sum() {
        return Err(SplitError::SumMismatch { targets: total, digit_sum: n.digit_sum() });
    }
    let bound = (n.base() as u64 - 2) * (v as u64 - 1);
    let last = targets[v - 1];
    if last <= bound {
        return Err(SplitError::LastTooSmall { last, bound });
    }

    let digits = n.digits();
    let mut lengths = Vec::with_capacity(v);
    let mut start = 0;
    for (index, &target) in targets[..v - 1].iter().enumerate() {
        // minimal cut where the running digit sum reaches the target
        let mut running = 0u64;
        let mut end = start;
        while end < digits.len() && running < target {
            running += digits[end] as u64;
            end += 1;
        }
        if running < target || end >= digits.len() {
            return Err(SplitError::Construction { index });
        }
        lengths.push(end - start);
        start = end;
    }
    lengths.push(digits.len() - start);
    Ok(lengths)
}

/// Splits `[n]_g = [n_1]_g | … | [n_v]_g` (with `n_1` least significant) so
/// that `|s_g(n_i) - s_i| ≤ (g-2)(v-1)`.
pub fn split(n: &DigitString, targets: &[u64]) -> Result<Vec<DigitString>, SplitError> {
    let lengths = split_lengths(n, targets)?;
    let mut parts = Vec::with_capacity(lengths.len());
    let mut start = 0;
    for (index, len) in lengths.into_iter().enumerate() {
        let part = n
            .slice(start..start + len)
            .ok_or(SplitError::Construction { index })?;
        parts.push(part);
        start += len;
    }
    Ok(parts)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("nothing to lift")]
    Empty,
    #[error("part {index}: certificate is for a different number")]
    Mismatch { index: usize },
    #[error("part {index}: certificate fails verification: {}", reasons.join("; "))]
    Invalid { index: usize, reasons: Vec<String> },
    #[error(transparent)]
    Digits(#[from] DigitError),
}

/// Reassembles block certificates: the summands of each block are shifted by
/// the total length of the blocks below it, so `n` is the sum of all of them.
pub fn lift(parts: &[(DigitString, DecompositionCert)]) -> Result<DecompositionCert, LiftError> {
    let Some((first, _)) = parts.first() else {
        return Err(LiftError::Empty);
    };
    for (index, (part, cert)) in parts.iter().enumerate() {
        if &cert.n != part {
            return Err(LiftError::Mismatch { index });
        }
        let verdict = verify_cert(cert);
        if !verdict.is_valid() {
            return Err(LiftError::Invalid { index, reasons: verdict.reasons });
        }
    }
    if parts.len() == 1 {
        return Ok(parts[0].1.clone());
    }
    let mut whole = first.clone();
    for (part, _) in &parts[1..] {
        whole = whole.concat(part)?;
    }
    let mut summands = Vec::new();
    let mut offset = 0;
    for (part, cert) in parts {
        summands.extend(cert.summands.iter().map(|s| s.shift(offset)));
        offset += part.len();
    }
    Ok(DecompositionCert::direct(whole, summands))
}

/// Which hypothesis of the single-block reduction failed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartHypothesis {
    #[error("h = {h} is outside [{lo}, {hi}]")]
    HOutOfRange { h: u64, lo: u64, hi: u64 },
    #[error("{g0} is not a primitive root modulo {p}")]
    NotPrimitiveRoot { g0: u64, p: u64 },
    #[error("s_g = {digit_sum} is not above (g-1)ℓ/3 with ℓ = {len}")]
    SparseDigits { digit_sum: u64, len: usize },
    #[error("s_g = {digit_sum} is not above 140g³ = {bound}")]
    BelowCube { digit_sum: u64, bound: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("digit sum {digit_sum} is below p = {p}")]
    DigitSumBelowPrime { digit_sum: u64, p: u64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(PartHypothesis),
    #[error("no {h} distinct powers of g hit n modulo {p}")]
    NoWitness { h: u64, p: u64 },
    #[error("hypotheses hold but no witness exists for h = {h}, p = {p}; the sumset bound would be false")]
    Contradiction { h: u64, p: u64 },
    #[error("internal: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Check every hypothesis of the block reduction before searching.
    #[default]
    Guaranteed,
    /// Skip the hypotheses and just try the subset search.
    BestEffort,
}

/// Checks hypotheses (i)–(iii) of the single-block reduction for `n` and `p`.
pub fn check_part_hypotheses(n: &DigitString, p: u64) -> Result<(), PartHypothesis> {
    let g = n.base() as u64;
    let s = n.digit_sum();
    let h = s.saturating_sub(p);
    if !(4 * g..=8 * g).contains(&h) || s < p {
        return Err(PartHypothesis::HOutOfRange { h, lo: 4 * g, hi: 8 * g });
    }
    let g0 = square_part(g).g0;
    if !is_primitive_root(g0, p) {
        return Err(PartHypothesis::NotPrimitiveRoot { g0, p });
    }
    if 3 * s as u128 <= (g as u128 - 1) * n.len() as u128 {
        return Err(PartHypothesis::SparseDigits { digit_sum: s, len: n.len() });
    }
    let bound = 140 * g * g * g;
    if s <= bound {
        return Err(PartHypothesis::BelowCube { digit_sum: s, bound });
    }
    Ok(())
}

/// Writes `n` as `m + Σ_{j ∈ J} g^j` with `|J| = h = s_g(n) - p`, where
/// `s_g(m) = p` and `p | m`, so every summand is Niven.
///
/// `J` is found by [`h_subset_sum`] over the residues `g^i mod p` of the
/// nonzero-digit positions; each residue maps back to its lowest position.
pub fn decompose_part(n: &DigitString, p: u64, mode: Mode) -> Result<DecompositionCert, PartError> {
    if !is_prime(p) {
        return Err(PartError::NotPrime(p));
    }
    let s = n.digit_sum();
    let Some(h) = s.checked_sub(p) else {
        return Err(PartError::DigitSumBelowPrime { digit_sum: s, p });
    };
    if mode == Mode::Guaranteed {
        check_part_hypotheses(n, p).map_err(PartError::Hypothesis)?;
    }
    let g = n.base() as u64;

    let mut lowest_position: BTreeMap<u64, usize> = BTreeMap::new();
    let mut power = 1 % p;
    for (i, &d) in n.digits().iter().enumerate() {
        if d != 0 {
            lowest_position.entry(power).or_insert(i);
        }
        power = (power as u128 * g as u128 % p as u128) as u64;
    }
    let residues: Vec<u64> = lowest_position.keys().copied().collect();
    let target = n.mod_eval(p).map_err(|e| PartError::Internal(e.to_string()))?;
    let witness = h_subset_sum(&residues, h as usize, target, p)
        .map_err(|e| PartError::Internal(e.to_string()))?;
    let Some(witness) = witness else {
        return Err(match mode {
            Mode::Guaranteed => PartError::Contradiction { h, p },
            Mode::BestEffort => PartError::NoWitness { h, p },
        });
    };
    let mut positions: Vec<usize> = witness.elements.iter().map(|r| lowest_position[r]).collect();
    positions.sort_unstable();

    let rest = n
        .subtract_powers(&positions)
        .map_err(|e| PartError::Internal(e.to_string()))?;
    let mut summands = Vec::with_capacity(positions.len() + 1);
    summands.push(rest);
    for &j in &positions {
        summands.push(DigitString::power(n.base(), j).expect("base already validated"));
    }
    let g0 = square_part(g).g0;
    let method = if h <= 8 * g && is_primitive_root(g0, p) {
        Method::LemmaRoot
    } else {
        Method::Direct
    };
    Ok(DecompositionCert {
        g: n.base(),
        n: n.clone(),
        method,
        summands,
        provenance: Some(Provenance {
            triple: None,
            split_lengths: vec![n.len()],
            witnesses: vec![positions],
            h: vec![h],
        }),
    })
}

/// Pipeline failures, tagged by stage.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("s2: window of {len} digits at position {start} is too sparse")]
    S2Violated { start: usize, len: usize },
    #[error("prime triple: no qualifying triple sums to s' = {target} (primes above {floor})")]
    NoPrimeTriple { target: u64, floor: u64 },
    #[error("split: {0}")]
    Split(#[from] SplitError),
    #[error("part {part}: {hypothesis}")]
    PartHypothesis { part: usize, hypothesis: PartHypothesis },
    #[error("part {part}: {source}")]
    Part { part: usize, source: PartError },
    #[error("lift: {0}")]
    Lift(#[from] LiftError),
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Precondition(_) => "precondition",
            PipelineError::S2Violated { .. } => "s2",
            PipelineError::NoPrimeTriple { .. } => "prime_triple",
            PipelineError::Split(_) => "split",
            PipelineError::PartHypothesis { .. } => "part_hypothesis",
            PipelineError::Part { .. } => "part",
            PipelineError::Lift(_) => "lift",
        }
    }

    /// True when a search ran out of candidates rather than a hypothesis failing.
    pub fn is_search_exhausted(&self) -> bool {
        matches!(
            self,
            PipelineError::NoPrimeTriple { .. }
                | PipelineError::Part { source: PartError::NoWitness { .. }, .. }
        )
    }
}

/// Smallest prime the guaranteed pipeline accepts in a triple.
///
/// After the split, block `i` has `s_g(n_i) ≥ p_i + 6g - 2(g-2) = p_i + 4g + 4`,
/// so primes above `140g³ - 4g - 4` keep every block above the `140g³` threshold.
pub fn triple_floor(g: u32) -> u64 {
    let g = g as u64;
    (140 * g * g * g).saturating_sub(4 * g + 4)
}

/// Decomposes `n` into at most `24g + 3` Niven numbers.
pub fn decompose(n: &DigitString, mode: Mode) -> Result<DecompositionCert, PipelineError> {
    let g = n.base() as u64;
    let s = n.digit_sum();
    if s < 18 * g + 3 {
        return Err(PipelineError::Precondition(format!(
            "digit sum {s} leaves s - 18g below 3"
        )));
    }
    let target = s - 18 * g;
    let floor = match mode {
        Mode::Guaranteed => {
            if let Some((start, len)) = n.s2_violation() {
                return Err(PipelineError::S2Violated { start, len });
            }
            triple_floor(n.base())
        }
        Mode::BestEffort => 0,
    };
    let g0 = square_part(g).g0;
    let triple = find_prime_triple_above(target, g0, floor)
        .ok_or(PipelineError::NoPrimeTriple { target, floor })?;
    let primes = triple.primes();
    let targets: Vec<u64> = primes.iter().map(|p| p + 6 * g).collect();
    let lengths = split_lengths(n, &targets)?;
    let parts = split(n, &targets)?;

    let certs: Vec<DecompositionCert> = parts
        .par_iter()
        .zip(primes.par_iter())
        .enumerate()
        .map(|(part, (block, &p))| {
            decompose_part(block, p, mode).map_err(|source| match source {
                PartError::Hypothesis(hypothesis) => {
                    PipelineError::PartHypothesis { part, hypothesis }
                }
                source => PipelineError::Part { part, source },
            })
        })
        .collect::<Result<_, _>>()?;

    let mut witnesses = Vec::with_capacity(3);
    let mut hs = Vec::with_capacity(3);
    let mut offset = 0;
    let mut all_blocks = true;
    for (cert, &len) in certs.iter().zip(&lengths) {
        let prov = cert.provenance.as_ref().expect("block certificates carry provenance");
        witnesses.push(prov.witnesses[0].iter().map(|j| j + offset).collect());
        hs.push(prov.h[0]);
        all_blocks &= cert.method == Method::LemmaRoot;
        offset += len;
    }
    let pairs: Vec<(DigitString, DecompositionCert)> = parts.into_iter().zip(certs).collect();
    let mut merged = lift(&pairs)?;
    merged.method = if all_blocks { Method::Pipeline } else { Method::Direct };
    merged.provenance = Some(Provenance {
        triple: Some(primes),
        split_lengths: lengths,
        witnesses,
        h: hs,
    });
    Ok(merged)
}
