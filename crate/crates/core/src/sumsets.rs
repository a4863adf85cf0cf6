//! Restricted sumsets over `F_p`.
//!
//! [`h_subset_sum`] finds `h` distinct elements of a residue set hitting a
//! target, with a deterministic witness. [`h_fold_sumset`] enumerates `h^∧A`
//! outright and serves as the oracle for small instances.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numtheory::is_prime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SumsetError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("residue {value} is not below p = {p}")]
    OutOfRange { value: u64, p: u64 },
    #[error("residue {0} appears twice")]
    Duplicate(u64),
}

/// `h` distinct residues modulo `p` summing to `target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetWitness {
    pub p: u64,
    /// Ascending.
    pub elements: Vec<u64>,
    pub target: u64,
}

impl SubsetWitness {
    pub fn h(&self) -> usize {
        self.elements.len()
    }

    /// Distinct, drawn from `set`, and summing to the target.
    pub fn verify(&self, set: &[u64]) -> bool {
        let distinct = self.elements.iter().collect::<BTreeSet<_>>().len() == self.elements.len();
        let members = self.elements.iter().all(|e| set.contains(e));
        let sum = self.elements.iter().fold(0u128, |acc, &e| acc + e as u128) % self.p as u128;
        distinct && members && sum == self.target as u128
    }
}

fn validate(set: &[u64], p: u64) -> Result<Vec<u64>, SumsetError> {
    if !is_prime(p) {
        return Err(SumsetError::NotPrime(p));
    }
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(SumsetError::Duplicate(w[0]));
        }
    }
    if let Some(&max) = sorted.last() {
        if max >= p {
            return Err(SumsetError::OutOfRange { value: max, p });
        }
    }
    Ok(sorted)
}

const UNSET: u32 = u32::MAX;

/// Finds `h` distinct elements of `set` summing to `target` modulo `p`.
///
/// 0/1-knapsack over (count, residue) with one bitset row per count. Elements
/// are processed in ascending order and each cell remembers the element that
/// first made it reachable; the backtrace therefore uses strictly smaller
/// elements at every step and the witness depends only on the input set.
/// Runs in `O(|A| h p / 64)` word operations plus `O(h p)` backtrace storage.
pub fn h_subset_sum(
    set: &[u64],
    h: usize,
    target: u64,
    p: u64,
) -> Result<Option<SubsetWitness>, SumsetError> {
    let elements = validate(set, p)?;
    if target >= p {
        return Err(SumsetError::OutOfRange { value: target, p });
    }
    if h > elements.len() {
        return Ok(None);
    }
    let width = p as usize;
    let words = width.div_ceil(64);
    let tail_mask = if width % 64 == 0 { !0 } else { (1u64 << (width % 64)) - 1 };

    let mut rows = vec![vec![0u64; words]; h + 1];
    rows[0][0] = 1;
    let mut setter = vec![UNSET; (h + 1) * width];
    let mut rotated = vec![0u64; words];

    for (k, &a) in elements.iter().enumerate() {
        let shift = a as usize;
        // rows above k cannot be reached by k + 1 elements
        for j in (0..h.min(k + 1)).rev() {
            rotate_into(&mut rotated, &rows[j], shift, width, tail_mask);
            let next = &mut rows[j + 1];
            for (w, (word, fresh)) in next.iter_mut().zip(&rotated).enumerate() {
                let mut added = fresh & !*word;
                *word |= added;
                while added != 0 {
                    let bit = added.trailing_zeros() as usize;
                    setter[(j + 1) * width + w * 64 + bit] = k as u32;
                    added &= added - 1;
                }
            }
        }
    }

    let t = target as usize;
    if rows[h][t / 64] >> (t % 64) & 1 == 0 {
        return Ok(None);
    }
    let mut picked = Vec::with_capacity(h);
    let mut residue = t;
    for j in (1..=h).rev() {
        let k = setter[j * width + residue];
        debug_assert_ne!(k, UNSET);
        let a = elements[k as usize];
        picked.push(a);
        residue = (residue + width - a as usize) % width;
    }
    debug_assert_eq!(residue, 0);
    picked.reverse();
    Ok(Some(SubsetWitness { p, elements: picked, target }))
}

// `dst` = `src` cyclically rotated up by `shift` within a ring of `width` bits.
fn rotate_into(dst: &mut [u64], src: &[u64], shift: usize, width: usize, tail_mask: u64) {
    let words = dst.len();
    dst.fill(0);
    let (q, r) = (shift / 64, shift % 64);
    for w in q..words {
        let mut v = src[w - q] << r;
        if r > 0 && w > q {
            v |= src[w - q - 1] >> (64 - r);
        }
        dst[w] = v;
    }
    dst[words - 1] &= tail_mask;
    if shift == 0 {
        return;
    }
    // bits wrapping past the top come back at the bottom
    let down = width - shift;
    let (q, r) = (down / 64, down % 64);
    for w in 0..words {
        let Some(&lo) = src.get(w + q) else { break };
        let mut v = lo >> r;
        if r > 0 {
            if let Some(&hi) = src.get(w + q + 1) {
                v |= hi << (64 - r);
            }
        }
        dst[w] |= v;
    }
    dst[words - 1] &= tail_mask;
}

/// `h^∧A` by enumerating every `h`-subset. Exponential; small instances only.
pub fn h_fold_sumset(set: &[u64], h: usize, p: u64) -> BTreeSet<u64> {
    fn walk(set: &[u64], h: usize, p: u64, acc: u64, hit: &mut [bool]) {
        if h == 0 {
            hit[acc as usize] = true;
            return;
        }
        if set.len() < h {
            return;
        }
        // leave room for the remaining h - 1 picks
        for i in 0..=set.len() - h {
            walk(&set[i + 1..], h - 1, p, (acc + set[i]) % p, hit);
        }
    }
    let mut hit = vec![false; p as usize];
    walk(set, h, p, 0, &mut hit);
    (0..p).filter(|&t| hit[t as usize]).collect()
}

/// Lower bound `min{p, h|A| - h² + 1}` on `|h^∧A|`, clamped at 0.
pub fn dsh_bound(p: u64, set_size: u64, h: u64) -> u64 {
    let raw = (h * set_size + 1).saturating_sub(h * h);
    raw.min(p)
}

/// Whether `|A| ≥ (p-1)/h + h`, the size that forces `h^∧A = F_p`.
pub fn covers_field(p: u64, set_size: u64, h: u64) -> bool {
    // |A| h ≥ p - 1 + h², kept in integers
    h > 0 && set_size * h >= p - 1 + h * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subsets(p: u64) -> impl Iterator<Item = Vec<u64>> {
        (0u32..1 << p).map(move |mask| (0..p).filter(|&i| mask >> i & 1 == 1).collect())
    }

    #[test]
    fn subset_sum_examples() {
        let w = h_subset_sum(&[1, 2, 3], 2, 0, 5).unwrap().unwrap();
        assert_eq!(w.elements, vec![2, 3]);
        let all = h_subset_sum(&[1, 2, 3], 3, 1, 5).unwrap().unwrap();
        assert_eq!(all.elements, vec![1, 2, 3]);
        assert_eq!(h_subset_sum(&[1, 2, 3], 1, 4, 5).unwrap(), None);
        assert_eq!(h_subset_sum(&[1, 2], 3, 3, 5).unwrap(), None);
        let empty = h_subset_sum(&[1, 2], 0, 0, 5).unwrap().unwrap();
        assert!(empty.elements.is_empty());
        assert_eq!(h_subset_sum(&[1, 2], 0, 1, 5).unwrap(), None);
    }

    #[test]
    fn subset_sum_rejects_bad_input() {
        assert_eq!(h_subset_sum(&[1], 1, 1, 6), Err(SumsetError::NotPrime(6)));
        assert_eq!(h_subset_sum(&[1, 1], 1, 1, 5), Err(SumsetError::Duplicate(1)));
        assert_eq!(
            h_subset_sum(&[7], 1, 1, 5),
            Err(SumsetError::OutOfRange { value: 7, p: 5 })
        );
        assert_eq!(
            h_subset_sum(&[1], 1, 5, 5),
            Err(SumsetError::OutOfRange { value: 5, p: 5 })
        );
    }

    #[test]
    fn fold_sumset_examples() {
        assert_eq!(h_fold_sumset(&[1, 2, 4], 2, 7), BTreeSet::from([3, 5, 6]));
        assert_eq!(h_fold_sumset(&[1, 2, 4], 3, 7), BTreeSet::from([0]));
        assert_eq!(h_fold_sumset(&[0, 1, 2, 3, 4], 2, 5).len(), 5);
    }

    #[test]
    fn bound_examples() {
        assert_eq!(dsh_bound(7, 3, 2), 3);
        assert_eq!(dsh_bound(11, 4, 0), 1);
        assert_eq!(dsh_bound(5, 5, 2), 5);
        assert_eq!(dsh_bound(13, 3, 3), 1);
        assert!(covers_field(5, 5, 2));
        assert!(!covers_field(7, 3, 2));
    }

    #[test]
    fn rotation_matches_naive() {
        for width in [1usize, 5, 63, 64, 65, 127, 128, 200] {
            let words = width.div_ceil(64);
            let mask = if width % 64 == 0 { !0 } else { (1u64 << (width % 64)) - 1 };
            let mut src = vec![0u64; words];
            let set: Vec<usize> = (0..width).filter(|i| (i * 7 + 3) % 5 < 2).collect();
            for &i in &set {
                src[i / 64] |= 1 << (i % 64);
            }
            for shift in 0..width {
                let mut dst = vec![0u64; words];
                rotate_into(&mut dst, &src, shift, width, mask);
                let got: BTreeSet<usize> =
                    (0..width).filter(|&i| dst[i / 64] >> (i % 64) & 1 == 1).collect();
                let want: BTreeSet<usize> = set.iter().map(|&i| (i + shift) % width).collect();
                assert_eq!(got, want, "width={width} shift={shift}");
                assert_eq!(dst[words - 1] & !mask, 0);
            }
        }
    }

    #[test]
    fn complete_against_enumeration() {
        for p in [2u64, 3, 5, 7, 11] {
            for set in subsets(p) {
                for h in 0..=set.len() {
                    let reach = h_fold_sumset(&set, h, p);
                    for target in 0..p {
                        let got = h_subset_sum(&set, h, target, p).unwrap();
                        assert_eq!(got.is_some(), reach.contains(&target), "p={p} A={set:?} h={h}");
                        if let Some(w) = got {
                            assert!(w.verify(&set));
                            assert_eq!(w.h(), h);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn witness_is_deterministic() {
        let set: Vec<u64> = (0..97).filter(|x| x % 3 != 1).collect();
        let a = h_subset_sum(&set, 9, 41, 97).unwrap();
        let mut shuffled = set.clone();
        shuffled.reverse();
        let b = h_subset_sum(&shuffled, 9, 41, 97).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn larger_prime_witness_verifies() {
        let p = 2_003u64;
        let set: Vec<u64> = (0..p).filter(|x| x % 5 == 2 || x % 7 == 3).collect();
        for target in [0, 1, 1_000, 2_002] {
            let w = h_subset_sum(&set, 16, target, p).unwrap().unwrap();
            assert!(w.verify(&set));
            assert_eq!(w.h(), 16);
        }
    }
}
