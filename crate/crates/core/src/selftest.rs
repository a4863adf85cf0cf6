//! Property suites that exercise the sumset bound and the split/lift and
//! single-block constructions on generated instances. Shared by the CLI's
//! `selftest` subcommand and the acceptance tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decomposer::{
    decompose_part, lift, split, verify_cert, DecompositionCert, Mode,
};
use crate::digits::DigitString;
use crate::numtheory::{is_prime, is_primitive_root, square_part};
use crate::sumsets::{covers_field, dsh_bound, h_fold_sumset, h_subset_sum};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checked: u64,
    pub violations: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport { name: name.to_string(), checked: 0, violations: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checked > 0 && self.violations.is_empty()
    }

    fn violation(&mut self, msg: String) {
        // keep reports readable when something is badly broken
        if self.violations.len() < 50 {
            self.violations.push(msg);
        }
    }
}

// Largest |A| drawn for random instances; the oracle enumerates C(|A|, h).
const RANDOM_SET_CAP: usize = 18;

fn check_sumset_instance(report: &mut SuiteReport, set: &[u64], h: usize, p: u64, with_solver: bool) {
    let sums = h_fold_sumset(set, h, p);
    let size = set.len() as u64;
    let bound = dsh_bound(p, size, h as u64);
    report.checked += 1;
    if (sums.len() as u64) < bound {
        report.violation(format!("p={p} A={set:?} h={h}: |h^A| = {} < {bound}", sums.len()));
    }
    if covers_field(p, size, h as u64) && sums.len() as u64 != p {
        report.violation(format!("p={p} A={set:?} h={h}: large A but h^A != F_p"));
    }
    if with_solver {
        for target in 0..p {
            let found = h_subset_sum(set, h, target, p).expect("valid instance");
            match found {
                Some(w) if !w.verify(set) || w.h() != h => {
                    report.violation(format!("p={p} A={set:?} h={h} t={target}: bad witness"))
                }
                Some(_) if !sums.contains(&target) => {
                    report.violation(format!("p={p} A={set:?} h={h} t={target}: spurious witness"))
                }
                None if sums.contains(&target) => {
                    report.violation(format!("p={p} A={set:?} h={h} t={target}: missed witness"))
                }
                _ => {}
            }
        }
    }
}

/// Sumset bound `|h^∧A| ≥ min{p, h|A| - h² + 1}` and its coverage corollary,
/// exhaustively for every prime `p ≤ max_exhaustive_p`, every `A ⊆ F_p` and
/// every `h ≤ |A|`, then on `random` instances with `p ≤ max_random_p`.
/// The subset-sum solver is cross-checked against enumeration on the
/// exhaustive part.
pub fn dsh_suite(max_exhaustive_p: u64, random: usize, max_random_p: u64, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("dsh_bound");
    for p in (2..=max_exhaustive_p).filter(|&p| is_prime(p)) {
        for mask in 0u64..1 << p {
            let set: Vec<u64> = (0..p).filter(|&i| mask >> i & 1 == 1).collect();
            for h in 0..=set.len() {
                check_sumset_instance(&mut report, &set, h, p, true);
            }
        }
    }
    let primes: Vec<u64> = (2..=max_random_p).filter(|&p| is_prime(p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        let p = *primes.choose(&mut rng).expect("at least one prime");
        let size = rng.gen_range(1..=(p as usize).min(RANDOM_SET_CAP));
        let mut field: Vec<u64> = (0..p).collect();
        field.shuffle(&mut rng);
        let mut set = field[..size].to_vec();
        set.sort_unstable();
        let h = rng.gen_range(1..=size);
        check_sumset_instance(&mut report, &set, h, p, false);
    }
    report
}

// Each nonzero digit d at position i gives the Niven number d * g^i.
fn digitwise_cert(n: &DigitString) -> DecompositionCert {
    let summands = n
        .digits()
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 0)
        .map(|(i, &d)| DigitString::new(n.base(), vec![d]).expect("digit in range").shift(i))
        .collect();
    DecompositionCert::direct(n.clone(), summands)
}

fn random_digits<R: Rng + ?Sized>(g: u32, len: usize, rng: &mut R) -> DigitString {
    let mut digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..g)).collect();
    digits[len - 1] = rng.gen_range(1..g);
    DigitString::new(g, digits).expect("digits in range")
}

/// Random targets `s_1..s_v` summing to `s` with `s_v > (g-2)(v-1)`, or `None`
/// when `s` is too small for `v` parts.
fn random_targets<R: Rng + ?Sized>(s: u64, g: u32, v: usize, rng: &mut R) -> Option<Vec<u64>> {
    let slack = (g as u64 - 2) * (v as u64 - 1);
    let others = v as u64 - 1;
    if s < slack + 1 + others {
        return None;
    }
    if others == 0 {
        return Some(vec![s]);
    }
    let last = rng.gen_range(slack + 1..=s - others);
    let mut rest = s - last;
    let mut targets = Vec::with_capacity(v);
    for k in (1..=others).rev() {
        // leave at least 1 for each remaining target
        let t = if k == 1 { rest } else { rng.gen_range(1..=rest - (k - 1)) };
        targets.push(t);
        rest -= t;
    }
    targets.shuffle(rng);
    targets.push(last);
    Some(targets)
}

/// Splitting and lifting: on `instances` random `(n, s_list)` per base, the
/// parts concatenate back to `n`, every part is canonical, every
/// `|s_g(n_i) - s_i| ≤ (g-2)(v-1)`, and lifting per-part certificates yields
/// a certificate for `n` that verifies.
pub fn split_suite(bases: &[u32], instances: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("split_join");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &g in bases {
        let mut done = 0;
        while done < instances {
            let len = rng.gen_range(1..=300);
            let n = random_digits(g, len, &mut rng);
            let v = rng.gen_range(1..=6);
            let Some(targets) = random_targets(n.digit_sum(), g, v, &mut rng) else {
                continue;
            };
            done += 1;
            report.checked += 1;
            let bound = (g as u64 - 2) * (v as u64 - 1);
            let parts = match split(&n, &targets) {
                Ok(parts) => parts,
                Err(e) => {
                    report.violation(format!("g={g} v={v} targets={targets:?}: {e}"));
                    continue;
                }
            };
            let mut glued = parts[0].clone();
            for part in &parts[1..] {
                glued = glued.concat(part).expect("same base");
            }
            if glued != n {
                report.violation(format!("g={g} targets={targets:?}: parts do not concatenate to n"));
            }
            for (i, (part, &t)) in parts.iter().zip(&targets).enumerate() {
                if part.digit_sum().abs_diff(t) > bound {
                    report.violation(format!(
                        "g={g} targets={targets:?}: part {i} digit sum {} vs {t}, bound {bound}",
                        part.digit_sum()
                    ));
                }
                if part.digits().last() == Some(&0) {
                    report.violation(format!("g={g}: part {i} has a zero top digit"));
                }
            }
            let pairs: Vec<_> = parts.iter().map(|p| (p.clone(), digitwise_cert(p))).collect();
            match lift(&pairs) {
                Ok(cert) if cert.n == n && verify_cert(&cert).is_valid() => {}
                Ok(_) => report.violation(format!("g={g} targets={targets:?}: lifted cert invalid")),
                Err(e) => report.violation(format!("g={g} targets={targets:?}: lift failed: {e}")),
            }
        }
    }
    report
}

/// A number meeting every hypothesis of the guaranteed block reduction:
/// `s_g(n) = p + h` with `h ∈ [4g, 8g]`, `p` prime with `g0` as primitive root,
/// and `s_g(n) > max{(g-1)ℓ/3, 140g³}`.
pub fn lemma_root_instance<R: Rng + ?Sized>(g: u32, rng: &mut R) -> (DigitString, u64) {
    let gg = g as u64;
    let g0 = square_part(gg).g0;
    let cube = 140 * gg * gg * gg;
    let p = loop {
        let candidate = rng.gen_range(cube..3 * cube);
        if is_prime(candidate) && is_primitive_root(g0, candidate) {
            break candidate;
        }
    };
    let h = rng.gen_range(4 * gg..=8 * gg);
    let s = p + h;
    // (g-1)ℓ < 3s, and ℓ long enough to hold s
    let min_len = s.div_ceil(gg - 1) as usize + 1;
    let max_len = ((3 * s - 1) / (gg - 1)) as usize;
    let len = rng.gen_range(min_len..=max_len);
    let mut digits = vec![0u32; len];
    digits[len - 1] = 1;
    let mut remaining = s - 1;
    while remaining > 0 {
        let i = rng.gen_range(0..len);
        if digits[i] < g - 1 {
            digits[i] += 1;
            remaining -= 1;
        }
    }
    (DigitString::new(g, digits).expect("digits in range"), p)
}

/// Guaranteed-mode block reduction on `instances` generated inputs: each must
/// succeed with at most `8g + 1` summands and a verifying certificate.
pub fn lemma_root_suite(g: u32, instances: usize, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::new("lemma_root");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = 8 * g as usize + 1;
    for i in 0..instances {
        let (n, p) = lemma_root_instance(g, &mut rng);
        report.checked += 1;
        match decompose_part(&n, p, Mode::Guaranteed) {
            Ok(cert) => {
                let verdict = verify_cert(&cert);
                if cert.summands.len() > cap {
                    report.violation(format!("instance {i}: {} summands", cert.summands.len()));
                }
                if !verdict.is_valid() {
                    report.violation(format!("instance {i}: {}", verdict.reasons.join("; ")));
                }
            }
            Err(e) => report.violation(format!("instance {i} (p = {p}): {e}")),
        }
    }
    report
}
