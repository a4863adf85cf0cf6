//! Machine-word number theory: primality, multiplicative orders, primitive
//! roots, the `g = g0^(2^u)` decomposition and the prime-triple search.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberTheoryError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{p} divides {a}, so {a} has no multiplicative order modulo {p}")]
    NotCoprime { a: u64, p: u64 },
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Deterministic Miller–Rabin; the first twelve primes as witnesses are
/// exact for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors, ascending, by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Floor of the square root.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// `g = g0^(2^u)` with `g0` not a perfect square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareDecomposition {
    pub g0: u64,
    pub u: u32,
}

impl SquareDecomposition {
    pub fn reconstruct(&self) -> Option<u64> {
        (0..self.u).try_fold(self.g0, |acc, _| acc.checked_mul(acc))
    }
}

pub fn square_part(g: u64) -> SquareDecomposition {
    let mut g0 = g;
    let mut u = 0;
    loop {
        let r = isqrt(g0);
        if r * r != g0 || r < 2 {
            return SquareDecomposition { g0, u };
        }
        g0 = r;
        u += 1;
    }
}

/// Least `t ≥ 1` with `a^t ≡ 1 (mod p)`, found by stripping prime factors
/// from `p - 1`.
pub fn multiplicative_order(a: u64, p: u64) -> Result<u64, NumberTheoryError> {
    if !is_prime(p) {
        return Err(NumberTheoryError::NotPrime(p));
    }
    if a % p == 0 {
        return Err(NumberTheoryError::NotCoprime { a, p });
    }
    let mut order = p - 1;
    for q in prime_factors(p - 1) {
        while order % q == 0 && pow_mod(a, order / q, p) == 1 {
            order /= q;
        }
    }
    Ok(order)
}

pub fn is_primitive_root(a: u64, p: u64) -> bool {
    if !is_prime(p) || a % p == 0 {
        return false;
    }
    prime_factors(p - 1)
        .into_iter()
        .all(|q| pow_mod(a, (p - 1) / q, p) != 1)
}

/// Three primes, ascending, summing to `target`, each having `g0` as a
/// primitive root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeTriple {
    pub p1: u64,
    pub p2: u64,
    pub p3: u64,
    pub target: u64,
    pub g0: u64,
}

impl PrimeTriple {
    pub fn primes(&self) -> [u64; 3] {
        [self.p1, self.p2, self.p3]
    }

    /// Re-checks every property from scratch; `floor` is the exclusive lower
    /// bound the primes were searched above.
    pub fn verify(&self, floor: u64) -> Result<(), String> {
        let ps = self.primes();
        if !(self.p1 <= self.p2 && self.p2 <= self.p3) {
            return Err(format!("primes {ps:?} not ascending"));
        }
        if ps.iter().map(|&p| p as u128).sum::<u128>() != self.target as u128 {
            return Err(format!("{ps:?} does not sum to {}", self.target));
        }
        let bound = floor.max(isqrt(self.target));
        for p in ps {
            if p <= bound {
                return Err(format!("prime {p} is not above {bound}"));
            }
            if !is_prime(p) {
                return Err(format!("{p} is not prime"));
            }
            if !is_primitive_root(self.g0, p) {
                return Err(format!("{} is not a primitive root modulo {p}", self.g0));
            }
        }
        Ok(())
    }
}

// Above this size the prime table is not worth allocating.
const TABLE_LIMIT: u64 = 1 << 26;

/// Lexicographically smallest triple with every prime above `⌊√target⌋`.
pub fn find_prime_triple(target: u64, g0: u64) -> Option<PrimeTriple> {
    find_prime_triple_above(target, g0, 0)
}

/// As [`find_prime_triple`], with every prime also above `floor`.
pub fn find_prime_triple_above(target: u64, g0: u64, floor: u64) -> Option<PrimeTriple> {
    let bound = floor.max(isqrt(target));
    if target < 3 || target / 3 <= bound {
        return None;
    }
    // primes above 2 are odd, and so is the sum of three of them
    if bound >= 2 && target % 2 == 0 {
        return None;
    }
    let mut candidates = Candidates::new(target, g0, bound);
    for p1 in (bound + 1)..=(target / 3) {
        if !candidates.ok(p1) {
            continue;
        }
        let rest = target - p1;
        for p2 in p1..=(rest / 2) {
            if candidates.ok(p2) && candidates.ok(rest - p2) {
                return Some(PrimeTriple { p1, p2, p3: rest - p2, target, g0 });
            }
        }
    }
    None
}

// Primes in (bound, limit] with g0 as primitive root, decided lazily.
struct Candidates {
    g0: u64,
    bound: u64,
    sieve: Option<Vec<bool>>,
    // 0 unknown, 1 yes, 2 no
    memo: Vec<u8>,
}

impl Candidates {
    fn new(limit: u64, g0: u64, bound: u64) -> Self {
        let (sieve, memo) = if limit <= TABLE_LIMIT {
            (Some(prime_sieve(limit as usize)), vec![0; limit as usize + 1])
        } else {
            (None, Vec::new())
        };
        Candidates { g0, bound, sieve, memo }
    }

    fn ok(&mut self, p: u64) -> bool {
        if p <= self.bound {
            return false;
        }
        let Some(sieve) = &self.sieve else {
            return is_prime(p) && is_primitive_root(self.g0, p);
        };
        if !sieve[p as usize] {
            return false;
        }
        let slot = &mut self.memo[p as usize];
        if *slot == 0 {
            *slot = if is_primitive_root(self.g0, p) { 1 } else { 2 };
        }
        *slot == 1
    }
}

/// `table[n]` is true iff `n` is prime, for `n ≤ limit`.
pub fn prime_sieve(limit: usize) -> Vec<bool> {
    let mut table = vec![true; limit + 1];
    table[0] = false;
    if limit >= 1 {
        table[1] = false;
    }
    let mut i = 2;
    while i * i <= limit {
        if table[i] {
            for j in (i * i..=limit).step_by(i) {
                table[j] = false;
            }
        }
        i += 1;
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    fn brute_order(a: u64, p: u64) -> u64 {
        let mut x = a % p;
        let mut t = 1;
        while x != 1 {
            x = x * (a % p) % p;
            t += 1;
        }
        t
    }

    #[test]
    fn primality_examples() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(!is_prime(561));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(3_825_123_056_546_413_051)); // strong pseudoprime to bases 2..23
    }

    #[test]
    fn primality_agrees_with_trial_division() {
        for n in 0..=1_000_000u64 {
            assert_eq!(is_prime(n), trial_division(n), "n={n}");
        }
    }

    #[test]
    fn square_part_examples() {
        assert_eq!(square_part(10), SquareDecomposition { g0: 10, u: 0 });
        assert_eq!(square_part(16), SquareDecomposition { g0: 2, u: 2 });
        assert_eq!(square_part(36), SquareDecomposition { g0: 6, u: 1 });
        assert_eq!(square_part(2), SquareDecomposition { g0: 2, u: 0 });
    }

    #[test]
    fn square_part_reconstructs() {
        for g in 2..=1_000_000u64 {
            let sd = square_part(g);
            assert_eq!(sd.reconstruct(), Some(g));
            let r = isqrt(sd.g0);
            assert_ne!(r * r, sd.g0, "g0 = {} is a square", sd.g0);
        }
    }

    #[test]
    fn order_examples() {
        assert_eq!(multiplicative_order(10, 7), Ok(6));
        assert_eq!(multiplicative_order(10, 11), Ok(2));
        assert_eq!(multiplicative_order(1, 13), Ok(1));
        assert_eq!(
            multiplicative_order(14, 7),
            Err(NumberTheoryError::NotCoprime { a: 14, p: 7 })
        );
        assert_eq!(multiplicative_order(2, 9), Err(NumberTheoryError::NotPrime(9)));
    }

    #[test]
    fn order_matches_brute_force() {
        for p in (2..2_000u64).filter(|&p| is_prime(p)) {
            for a in 1..p.min(60) {
                let t = multiplicative_order(a, p).unwrap();
                assert_eq!(t, brute_order(a, p), "a={a} p={p}");
                assert_eq!((p - 1) % t, 0);
                assert_eq!(pow_mod(a, t, p), 1);
                for q in prime_factors(t) {
                    assert_ne!(pow_mod(a, t / q, p), 1);
                }
                assert_eq!(is_primitive_root(a, p), t == p - 1);
            }
        }
    }

    #[test]
    fn primitive_root_examples() {
        assert!(is_primitive_root(10, 7));
        assert!(!is_primitive_root(10, 11));
        for a in [1u64, 3, 5, 99] {
            assert!(is_primitive_root(a, 2));
        }
        assert!(!is_primitive_root(10, 5));
    }

    // Independent search: all ascending triples by direct enumeration.
    fn brute_triple(target: u64, g0: u64) -> Option<(u64, u64, u64)> {
        let b = isqrt(target);
        let ok = |p: u64| p > b && trial_division(p) && g0 % p != 0 && brute_order(g0 % p, p) == p - 1;
        for p1 in 0..=target {
            for p2 in p1..=target.saturating_sub(p1) {
                let Some(p3) = target.checked_sub(p1 + p2) else { continue };
                if p3 >= p2 && ok(p1) && ok(p2) && ok(p3) {
                    return Some((p1, p2, p3));
                }
            }
        }
        None
    }

    #[test]
    fn triple_examples() {
        let t = find_prime_triple(41, 2).unwrap();
        assert_eq!(t.primes(), [11, 11, 19]);
        assert_eq!(t.verify(0), Ok(()));
        assert_eq!(find_prime_triple(40, 2), None);
        assert_eq!(find_prime_triple(1000, 3), None);
        assert_eq!(find_prime_triple(6, 2), None);
        assert_eq!(find_prime_triple(2, 2), None);
    }

    #[test]
    fn triple_matches_brute_force() {
        for g0 in [2u64, 3, 5, 6, 10] {
            for target in 3..300u64 {
                let got = find_prime_triple(target, g0).map(|t| (t.p1, t.p2, t.p3));
                assert_eq!(got, brute_triple(target, g0), "target={target} g0={g0}");
            }
        }
    }

    #[test]
    fn triple_results_reverify() {
        for target in (1_001..20_000u64).step_by(58) {
            if let Some(t) = find_prime_triple(target, 2) {
                assert_eq!(t.verify(0), Ok(()));
            }
            if let Some(t) = find_prime_triple_above(target, 2, 1_108) {
                assert_eq!(t.verify(1_108), Ok(()));
            }
        }
    }

    #[test]
    fn triple_without_table_matches() {
        // above the table limit the search tests candidates directly
        let target = TABLE_LIMIT + 1_001;
        let t = find_prime_triple(target, 2).unwrap();
        assert_eq!(t.verify(0), Ok(()));
        assert!(t.p1 > isqrt(target));
    }

    #[test]
    fn verify_rejects_bad_triples() {
        let good = find_prime_triple(41, 2).unwrap();
        let mut bad = good;
        bad.p3 = 21;
        assert!(bad.verify(0).is_err());
        bad = good;
        bad.g0 = 3; // 3 has order 5 modulo 11
        assert!(bad.verify(0).is_err());
        assert!(good.verify(11).is_err());
    }
}
