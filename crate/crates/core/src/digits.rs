//! Base-g digit strings.
//!
//! A [`DigitString`] stores the digits of a positive integer least significant
//! first, with a nonzero most significant digit. Every operation here is
//! digit-local, so numbers with tens of thousands of digits cost no more than
//! a pass over the vector.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DigitError {
    #[error("base {0} is smaller than 2")]
    InvalidBase(u64),
    #[error("zero has no base-g representation")]
    Zero,
    #[error("empty digit string")]
    Empty,
    #[error("digit {digit} at position {position} is out of range for base {base}")]
    DigitOutOfRange { position: usize, digit: u32, base: u32 },
    #[error("most significant digit is zero")]
    LeadingZero,
    #[error("base mismatch: {0} vs {1}")]
    BaseMismatch(u32, u32),
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("position {position} is outside a string of length {len}")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("position {0} holds digit 0 and cannot be decremented without a borrow")]
    ZeroDigitAt(usize),
    #[error("position {0} listed twice")]
    DuplicatePosition(usize),
}

/// Digits of a positive integer in base `g`, index 0 least significant.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDigitString")]
pub struct DigitString {
    base: u32,
    digits: Vec<u32>,
    #[serde(skip)]
    digit_sum: u64,
}

#[derive(Deserialize)]
struct RawDigitString {
    base: u32,
    digits: Vec<u32>,
}

impl TryFrom<RawDigitString> for DigitString {
    type Error = DigitError;

    fn try_from(raw: RawDigitString) -> Result<Self, Self::Error> {
        DigitString::new(raw.base, raw.digits)
    }
}

pub(crate) fn check_base(base: u64) -> Result<u32, DigitError> {
    if base < 2 || base > u32::MAX as u64 {
        return Err(DigitError::InvalidBase(base));
    }
    Ok(base as u32)
}

impl DigitString {
    /// Validates a little-endian digit vector.
    pub fn new(base: u32, digits: Vec<u32>) -> Result<Self, DigitError> {
        check_base(base as u64)?;
        if digits.is_empty() {
            return Err(DigitError::Empty);
        }
        let mut digit_sum = 0u64;
        for (position, &digit) in digits.iter().enumerate() {
            if digit >= base {
                return Err(DigitError::DigitOutOfRange { position, digit, base });
            }
            digit_sum += digit as u64;
        }
        if *digits.last().unwrap() == 0 {
            return Err(DigitError::LeadingZero);
        }
        Ok(DigitString { base, digits, digit_sum })
    }

    /// `[n]_g` for a machine-size `n ≥ 1`.
    pub fn from_u64(n: u64, base: u32) -> Result<Self, DigitError> {
        check_base(base as u64)?;
        if n == 0 {
            return Err(DigitError::Zero);
        }
        let g = base as u64;
        let mut digits = Vec::new();
        let mut rest = n;
        let mut digit_sum = 0;
        while rest > 0 {
            let d = rest % g;
            digits.push(d as u32);
            digit_sum += d;
            rest /= g;
        }
        Ok(DigitString { base, digits, digit_sum })
    }

    /// `g^exponent`: a single 1 followed by `exponent` zeros.
    pub fn power(base: u32, exponent: usize) -> Result<Self, DigitError> {
        check_base(base as u64)?;
        let mut digits = vec![0; exponent + 1];
        digits[exponent] = 1;
        Ok(DigitString { base, digits, digit_sum: 1 })
    }

    // Caller guarantees the invariants.
    fn from_trusted(base: u32, digits: Vec<u32>) -> Self {
        debug_assert!(!digits.is_empty() && *digits.last().unwrap() != 0);
        let digit_sum = digits.iter().map(|&d| d as u64).sum();
        DigitString { base, digits, digit_sum }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// `ℓ_g(n)`.
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    /// Always false; present for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `s_g(n)`.
    pub fn digit_sum(&self) -> u64 {
        self.digit_sum
    }

    /// The value as a `u64`, if it fits.
    pub fn value(&self) -> Option<u64> {
        let g = self.base as u64;
        self.digits
            .iter()
            .rev()
            .try_fold(0u64, |acc, &d| acc.checked_mul(g)?.checked_add(d as u64))
    }

    /// True iff the number is a power of the base (digit sum 1).
    pub fn is_power_of_base(&self) -> bool {
        self.digit_sum == 1
    }

    /// Concatenation `low | high`: `low` keeps the least significant positions,
    /// so the value is `low + g^len(low) * high`.
    pub fn concat(&self, high: &DigitString) -> Result<DigitString, DigitError> {
        if self.base != high.base {
            return Err(DigitError::BaseMismatch(self.base, high.base));
        }
        let mut digits = Vec::with_capacity(self.len() + high.len());
        digits.extend_from_slice(&self.digits);
        digits.extend_from_slice(&high.digits);
        Ok(DigitString {
            base: self.base,
            digits,
            digit_sum: self.digit_sum + high.digit_sum,
        })
    }

    /// Multiplies by `g^places`.
    pub fn shift(&self, places: usize) -> DigitString {
        let mut digits = vec![0; places];
        digits.extend_from_slice(&self.digits);
        DigitString { base: self.base, digits, digit_sum: self.digit_sum }
    }

    /// The number whose digits are `digits[range]`, or `None` when the slice is
    /// empty or its top digit is zero (such a slice is not a canonical `[m]_g`).
    pub fn slice(&self, range: std::ops::Range<usize>) -> Option<DigitString> {
        let part = self.digits.get(range)?;
        match part.last() {
            Some(&d) if d != 0 => Some(DigitString::from_trusted(self.base, part.to_vec())),
            _ => None,
        }
    }

    /// `n mod m` by Horner's scheme from the top digit down.
    pub fn mod_eval(&self, modulus: u64) -> Result<u64, DigitError> {
        if modulus == 0 {
            return Err(DigitError::ZeroModulus);
        }
        let m = modulus as u128;
        let g = self.base as u128 % m;
        let r = self
            .digits
            .iter()
            .rev()
            .fold(0u128, |acc, &d| (acc * g + d as u128) % m);
        Ok(r as u64)
    }

    /// Divisible by its own digit sum.
    pub fn is_niven(&self) -> bool {
        // digit_sum ≥ 1 because the top digit is nonzero
        self.mod_eval(self.digit_sum).map(|r| r == 0).unwrap_or(false)
    }

    /// `n - Σ_{j ∈ positions} g^j`, decrementing each listed digit by exactly one.
    /// No borrows are allowed: every listed digit must be nonzero.
    pub fn subtract_powers(&self, positions: &[usize]) -> Result<DigitString, DigitError> {
        let mut digits = self.digits.clone();
        let mut seen = std::collections::HashSet::with_capacity(positions.len());
        for &j in positions {
            if !seen.insert(j) {
                return Err(DigitError::DuplicatePosition(j));
            }
            match digits.get_mut(j) {
                None => return Err(DigitError::PositionOutOfRange { position: j, len: self.len() }),
                Some(0) => return Err(DigitError::ZeroDigitAt(j)),
                Some(d) => *d -= 1,
            }
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
        if digits.is_empty() {
            return Err(DigitError::Zero);
        }
        Ok(DigitString {
            base: self.base,
            digits,
            digit_sum: self.digit_sum - positions.len() as u64,
        })
    }

    /// Adds digit strings with carries. All inputs must share a base.
    pub fn sum<'a, I>(items: I) -> Result<DigitString, DigitError>
    where
        I: IntoIterator<Item = &'a DigitString>,
    {
        let mut base = None;
        let mut acc: Vec<u128> = Vec::new();
        for item in items {
            match base {
                None => base = Some(item.base),
                Some(b) if b != item.base => return Err(DigitError::BaseMismatch(b, item.base)),
                Some(_) => {}
            }
            if acc.len() < item.len() {
                acc.resize(item.len(), 0);
            }
            for (slot, &d) in acc.iter_mut().zip(&item.digits) {
                *slot += d as u128;
            }
        }
        let base = base.ok_or(DigitError::Empty)?;
        let g = base as u128;
        let mut digits = Vec::with_capacity(acc.len() + 4);
        let mut carry = 0u128;
        for slot in acc {
            let v = slot + carry;
            digits.push((v % g) as u32);
            carry = v / g;
        }
        while carry > 0 {
            digits.push((carry % g) as u32);
            carry /= g;
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
        if digits.is_empty() {
            return Err(DigitError::Zero);
        }
        Ok(DigitString::from_trusted(base, digits))
    }

    /// Condition (S2): every substring `[m]_g` of `[n]_g` with
    /// `ℓ_g(m) ≥ 36 ln ℓ_g(n)` has `s_g(m) > (g-1) ℓ_g(m) / 3`.
    pub fn s2_scan(&self) -> bool {
        self.s2_violation().is_none()
    }

    /// First window `(start, length)` breaking (S2), scanning by top position.
    ///
    /// With `f(i) = 3 P(i) - (g-1) i` over digit prefix sums `P`, the window
    /// `[i, j]` passes iff `f(j+1) > f(i)`, so one pass with a running prefix
    /// maximum of `f` decides every window ending at `j` at once.
    pub fn s2_violation(&self) -> Option<(usize, usize)> {
        let len = self.len();
        let min_window = s2_min_window(len);
        if min_window > len {
            return None;
        }
        let slope = (self.base - 1) as i128;
        let mut prefix = Vec::with_capacity(len + 1);
        prefix.push(0i128);
        for &d in &self.digits {
            prefix.push(prefix.last().unwrap() + d as i128);
        }
        let f = |i: usize| 3 * prefix[i] - slope * i as i128;

        let mut best = i128::MIN;
        let mut best_at = 0;
        let mut next = 0;
        for top in 0..len {
            // windows [i, top] with top + 1 - i >= min_window
            while next + min_window <= top + 1 {
                let v = f(next);
                if v > best {
                    best = v;
                    best_at = next;
                }
                next += 1;
            }
            if next > 0 && self.digits[top] != 0 && f(top + 1) <= best {
                return Some((best_at, top + 1 - best_at));
            }
        }
        None
    }
}

/// Shortest window length constrained by (S2): `⌈36 ln ℓ⌉`, at least 1.
pub fn s2_min_window(len: usize) -> usize {
    if len <= 1 {
        return 1;
    }
    ((36.0 * (len as f64).ln()).ceil() as usize).max(1)
}

/// Digit sum of a machine-size integer.
pub fn digit_sum_u64(mut n: u64, base: u32) -> u64 {
    let g = base as u64;
    let mut s = 0;
    while n > 0 {
        s += n % g;
        n /= g;
    }
    s
}

/// Divisible by the product of its base-g digits; a zero digit disqualifies.
pub fn is_zuckerman(n: u64, base: u32) -> bool {
    if n == 0 || base < 2 {
        return false;
    }
    let g = base as u64;
    let mut rest = n;
    // the digit product never exceeds n, so this cannot overflow
    let mut product = 1u64;
    while rest > 0 {
        let d = rest % g;
        if d == 0 {
            return false;
        }
        product *= d;
        rest /= g;
    }
    n % product == 0
}

impl fmt::Debug for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DigitString(base {}, {:?})", self.base, self.digits)
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => write!(
                f,
                "<{} base-{} digits, digit sum {}>",
                self.len(),
                self.base,
                self.digit_sum
            ),
        }
    }
}
