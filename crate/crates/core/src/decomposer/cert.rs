use serde::{Deserialize, Serialize};

use crate::digits::DigitString;
use crate::numtheory::{is_prime, is_primitive_root, isqrt, square_part};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Plain list of Niven summands.
    Direct,
    /// One block: a big Niven summand with prime digit sum plus `h` powers of g.
    LemmaRoot,
    /// Three lemma-root blocks glued along a split of the digit string.
    Pipeline,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::LemmaRoot => "lemma_root",
            Method::Pipeline => "pipeline",
        }
    }
}

/// How the summands were obtained. Witness positions are absolute digit
/// positions in the certified number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub triple: Option<[u64; 3]>,
    pub split_lengths: Vec<usize>,
    pub witnesses: Vec<Vec<usize>>,
    pub h: Vec<u64>,
}

/// A checkable claim that `n` is the sum of the listed Niven numbers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionCert {
    pub g: u32,
    pub n: DigitString,
    pub method: Method,
    pub summands: Vec<DigitString>,
    pub provenance: Option<Provenance>,
}

impl DecompositionCert {
    pub fn direct(n: DigitString, summands: Vec<DigitString>) -> Self {
        DecompositionCert { g: n.base(), n, method: Method::Direct, summands, provenance: None }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Summand cap implied by the method: `8g + 1` per block, `24g + 3` for the pipeline.
    pub fn summand_cap(&self) -> Option<usize> {
        let g = self.g as usize;
        match self.method {
            Method::Direct => None,
            Method::LemmaRoot => Some(8 * g + 1),
            Method::Pipeline => Some(24 * g + 3),
        }
    }
}

/// Outcome of [`verify_cert`]; valid iff no reasons were recorded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verdict {
    pub reasons: Vec<String>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.reasons.is_empty()
    }

    fn fail(&mut self, reason: impl Into<String>) {
        self.reasons.push(reason.into());
    }
}

/// Re-checks a certificate from scratch.
///
/// Every summand must be Niven and the summands must add up to `n` under
/// digit-wise carry addition. Lemma-root and pipeline certificates must also
/// respect their summand caps, consist of powers of g plus Niven numbers whose
/// digit sum is a prime having `g0` as a primitive root, and carry provenance
/// that re-derives: the prime triple, the split, each `h`, and each witness.
pub fn verify_cert(cert: &DecompositionCert) -> Verdict {
    let mut v = Verdict::default();
    let g = cert.g;
    if cert.n.base() != g {
        v.fail(format!("n is written in base {} but the certificate says {g}", cert.n.base()));
        return v;
    }
    if cert.summands.is_empty() {
        v.fail("no summands");
        return v;
    }
    for (i, s) in cert.summands.iter().enumerate() {
        if s.base() != g {
            v.fail(format!("summand {i} is written in base {}", s.base()));
            return v;
        }
        if !s.is_niven() {
            v.fail(format!("summand {i} ({s}) is not a Niven number"));
        }
    }
    match DigitString::sum(&cert.summands) {
        Ok(total) if total == cert.n => {}
        Ok(total) => v.fail(format!("summands add up to {total}, not {}", cert.n)),
        Err(e) => v.fail(format!("cannot add summands: {e}")),
    }
    if let Some(cap) = cert.summand_cap() {
        if cert.summands.len() > cap {
            v.fail(format!(
                "{} summands exceed the {} cap of {cap}",
                cert.summands.len(),
                cert.method.as_str()
            ));
        }
    }
    let g0 = square_part(g as u64).g0;
    if cert.method != Method::Direct {
        for (i, s) in cert.summands.iter().enumerate() {
            if s.is_power_of_base() {
                continue;
            }
            let p = s.digit_sum();
            if !is_prime(p) || !is_primitive_root(g0, p) {
                v.fail(format!(
                    "summand {i} has digit sum {p}, not a prime with {g0} as primitive root"
                ));
            }
        }
    }
    match (&cert.provenance, cert.method) {
        (Some(prov), _) => check_provenance(cert, prov, g0, &mut v),
        (None, Method::Direct) => {}
        (None, m) => v.fail(format!("{} certificate without provenance", m.as_str())),
    }
    v
}

fn check_provenance(cert: &DecompositionCert, prov: &Provenance, g0: u64, v: &mut Verdict) {
    let g = cert.g as u64;
    let n = &cert.n;
    let parts = prov.split_lengths.len();
    if parts == 0 || prov.witnesses.len() != parts || prov.h.len() != parts {
        v.fail(format!(
            "provenance lists {} split lengths, {} witnesses and {} h values",
            parts,
            prov.witnesses.len(),
            prov.h.len()
        ));
        return;
    }
    if prov.split_lengths.iter().sum::<usize>() != n.len() {
        v.fail("split lengths do not cover the digit string");
        return;
    }

    // the primes each block was reduced modulo
    let primes: Vec<u64> = match (prov.triple, cert.method) {
        (Some(triple), _) => {
            let s = n.digit_sum();
            let Some(target) = s.checked_sub(18 * g) else {
                v.fail("triple given but digit sum is at most 18g");
                return;
            };
            let mut sorted = triple;
            sorted.sort_unstable();
            if sorted != triple {
                v.fail(format!("triple {triple:?} is not ascending"));
            }
            if triple.iter().map(|&p| p as u128).sum::<u128>() != target as u128 {
                v.fail(format!("triple {triple:?} does not sum to s - 18g = {target}"));
            }
            let root = isqrt(target);
            for p in triple {
                if p <= root {
                    v.fail(format!("prime {p} is not above sqrt({target})"));
                }
                if !is_prime(p) || !is_primitive_root(g0, p) {
                    v.fail(format!("{p} is not a prime with {g0} as primitive root"));
                }
            }
            if parts != 3 {
                v.fail(format!("a prime triple needs 3 parts, got {parts}"));
                return;
            }
            triple.to_vec()
        }
        (None, Method::Pipeline) => {
            v.fail("pipeline certificate without a prime triple");
            return;
        }
        (None, _) => {
            // single block: p = s_g(n) - h
            let Some(p) = n.digit_sum().checked_sub(prov.h[0]) else {
                v.fail("h exceeds the digit sum");
                return;
            };
            if parts != 1 {
                v.fail(format!("without a triple there must be one part, got {parts}"));
                return;
            }
            if !is_prime(p) {
                v.fail(format!("s_g(n) - h = {p} is not prime"));
                return;
            }
            vec![p]
        }
    };

    let mut offset = 0;
    let mut expected_powers = Vec::new();
    for (i, (&len, &p)) in prov.split_lengths.iter().zip(&primes).enumerate() {
        let Some(part) = n.slice(offset..offset + len) else {
            v.fail(format!("part {i} is empty or has a zero top digit"));
            return;
        };
        if prov.triple.is_some() {
            // s_i = p_i + 6g and |s_g(n_i) - s_i| ≤ 2(g - 2)
            let target = p.saturating_add(6 * g);
            let slack = 2 * g.saturating_sub(2);
            if part.digit_sum().abs_diff(target) > slack {
                v.fail(format!(
                    "part {i} has digit sum {}, further than {slack} from {target}",
                    part.digit_sum()
                ));
            }
        }
        let h = prov.h[i];
        if part.digit_sum().checked_sub(p) != Some(h) {
            v.fail(format!("part {i}: h = {h} but s_g(n_i) - p_i = {} - {p}", part.digit_sum()));
        }
        let witness = &prov.witnesses[i];
        if witness.len() as u64 != h {
            v.fail(format!("part {i}: witness has {} positions, h = {h}", witness.len()));
        }
        let mut sorted = witness.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != witness.len() {
            v.fail(format!("part {i}: repeated witness position"));
        }
        let mut residue = 0u64;
        for &j in witness {
            if j < offset || j >= offset + len || n.digits()[j] == 0 {
                v.fail(format!("part {i}: position {j} is not a nonzero digit of the part"));
                continue;
            }
            residue = (residue + crate::numtheory::pow_mod(g, (j - offset) as u64, p)) % p;
        }
        match part.mod_eval(p) {
            Ok(r) if r == residue => {}
            _ => v.fail(format!("part {i}: witness powers are not congruent to n_i modulo {p}")),
        }
        expected_powers.extend_from_slice(witness);
        offset += len;
    }

    let expected_count: u64 = prov.h.iter().map(|h| h + 1).sum();
    if cert.summands.len() as u64 != expected_count {
        v.fail(format!(
            "{} summands, provenance accounts for {expected_count}",
            cert.summands.len()
        ));
    }
    // each witness position must appear as a g^j summand
    let mut powers: Vec<usize> = cert
        .summands
        .iter()
        .filter(|s| s.is_power_of_base())
        .map(|s| s.len() - 1)
        .collect();
    powers.sort_unstable();
    expected_powers.sort_unstable();
    if expected_powers != powers {
        v.fail("power-of-g summands do not match the witness positions");
    }
}

