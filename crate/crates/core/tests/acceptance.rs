//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use niven_core::decomposer::{default_residue, triple_floor};
use niven_core::rangelab::{count_niven_at, MemberTable};
use niven_core::selftest::{dsh_suite, lemma_root_instance, lemma_root_suite, split_suite};
use niven_core::{
    decompose, decompose_part, estimate_density_s, sample_s, verify_cert, verify_range,
    DecompositionCert, DigitString, Kind, Method, Mode, PrimeTriple, RangeConfig, SClassParams,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn range_niven() -> Outcome {
    let report = verify_range(&RangeConfig::new(10_000_000, 10, 2, Kind::Niven)).unwrap();
    outcome(
        report.exceptions.is_empty(),
        format!(
            "N=10^7 g=10 k=2: {} exceptions, {} Niven numbers, {} fallbacks",
            report.exceptions.len(),
            report.stats.member_count,
            report.stats.fallbacks
        ),
    )
}

fn range_zuckerman() -> Outcome {
    let report = verify_range(&RangeConfig::new(1_000_000, 10, 4, Kind::Zuckerman)).unwrap();
    let table = MemberTable::build(Kind::Zuckerman, 106, 10).unwrap();
    let proven = niven_core::rangelab::prove_unrepresentable(106, 4, &table);
    outcome(
        report.exceptions == [106] && report.exceptions_proven && proven,
        format!(
            "N=10^6 g=10 k=4: exceptions {:?}, exhaustively proven: {}",
            report.exceptions, report.exceptions_proven
        ),
    )
}

fn dsh() -> Outcome {
    let r = dsh_suite(13, 10_000, 101, 2024);
    outcome(
        r.passed(),
        format!("{} instances, {} violations {:?}", r.checked, r.violations.len(), r.violations.first()),
    )
}

fn split_join() -> Outcome {
    let r = split_suite(&[2, 3, 10, 16], 10_000, 77);
    outcome(
        r.passed() && r.checked == 40_000,
        format!("{} instances, {} violations {:?}", r.checked, r.violations.len(), r.violations.first()),
    )
}

fn lemma_root() -> Outcome {
    let r = lemma_root_suite(2, 100, 31);
    outcome(
        r.passed() && r.checked == 100,
        format!("{} instances at g=2, {} violations {:?}", r.checked, r.violations.len(), r.violations.first()),
    )
}

fn pipeline() -> Outcome {
    let g = 2;
    let len = 12_000;
    let Some(r_prime) = default_residue(g, len as u64 / 2, 4) else {
        return outcome(false, "no admissible residue found");
    };
    let params = SClassParams::pipeline(r_prime, g);
    let floor = triple_floor(g);
    let results: Vec<Result<usize, String>> = (0..20u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1_000 + i);
            let n = sample_s(&params, len, &mut rng, 1_000).map_err(|e| e.to_string())?;
            let cert = decompose(&n, Mode::Guaranteed).map_err(|e| format!("sample {i}: {e}"))?;
            let verdict = verify_cert(&cert);
            if !verdict.is_valid() {
                return Err(format!("sample {i}: {}", verdict.reasons.join("; ")));
            }
            if cert.summands.len() > 24 * g as usize + 3 {
                return Err(format!("sample {i}: {} summands", cert.summands.len()));
            }
            let [p1, p2, p3] = cert
                .provenance
                .as_ref()
                .and_then(|p| p.triple)
                .ok_or(format!("sample {i}: no triple"))?;
            let triple =
                PrimeTriple { p1, p2, p3, target: n.digit_sum() - 18 * g as u64, g0: 2 };
            triple.verify(floor).map_err(|e| format!("sample {i}: {e}"))?;
            Ok(cert.summands.len())
        })
        .collect();
    let failures: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let most = results.iter().filter_map(|r| r.as_ref().ok()).max().copied().unwrap_or(0);
    outcome(
        failures.is_empty(),
        format!("20 samples, r'={r_prime}, ℓ={len}: max {most} summands, failures {failures:?}"),
    )
}

fn counting() -> Outcome {
    let rows = count_niven_at(&[10_000, 100_000, 1_000_000, 10_000_000], 10);
    let c: Vec<f64> = rows.iter().map(|r| r.c_estimate).collect();
    let top = (c[3] - c[2]).abs() / c[2];
    outcome(
        top < 0.10,
        format!(
            "c_estimate {:?}, top decades differ by {:.2}%",
            c.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            100.0 * top
        ),
    )
}

fn density() -> Outcome {
    let d = estimate_density_s(&SClassParams::new(3, 0, 10), 1_000_000);
    let lower = 1.0 / (2.0 * 10f64.powi(4));
    let rel = (d - 1.0 / 3.0).abs() * 3.0;
    outcome(
        rel < 0.05 && d > 100.0 * lower,
        format!("density {d:.5}, {:.2}% from 1/3, lower bound {lower:e}", 100.0 * rel),
    )
}

// Corrupts `cert` so that it no longer certifies a valid decomposition.
fn corrupt<R: Rng>(cert: &DecompositionCert, rng: &mut R) -> DecompositionCert {
    let mut bad = cert.clone();
    let g = cert.g;
    let kinds: &[u8] = if cert.provenance.is_some() { &[0, 1, 2, 3, 4, 5, 6, 7] } else { &[0, 1, 2, 3, 4] };
    match *kinds.choose(rng).unwrap() {
        0 => {
            // bump n by one unit at a random position
            let pos = rng.gen_range(0..bad.n.len());
            let unit = DigitString::power(g, pos).unwrap();
            bad.n = DigitString::sum([&bad.n, &unit]).unwrap();
        }
        1 => {
            bad.summands.remove(rng.gen_range(0..bad.summands.len()));
        }
        2 => {
            let extra = bad.summands.choose(rng).unwrap().clone();
            bad.summands.push(extra);
        }
        3 => {
            // replace a summand by a non-Niven number (single digits are all Niven)
            let i = rng.gen_range(0..bad.summands.len());
            let len = bad.summands[i].len().max(2);
            bad.summands[i] = loop {
                let mut digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..g)).collect();
                digits[len - 1] = rng.gen_range(1..g);
                let d = DigitString::new(g, digits).unwrap();
                if !d.is_niven() {
                    break d;
                }
            };
        }
        4 => {
            if cert.method == Method::Direct {
                bad.method = Method::LemmaRoot;
                bad.provenance = None;
            } else {
                bad.provenance = None;
            }
        }
        5 => {
            let prov = bad.provenance.as_mut().unwrap();
            let w = prov.witnesses.iter_mut().find(|w| !w.is_empty());
            match w {
                Some(w) => w[0] += 1,
                None => prov.h[0] += 1,
            }
        }
        6 => {
            let prov = bad.provenance.as_mut().unwrap();
            prov.h[0] += 1;
        }
        _ => {
            let prov = bad.provenance.as_mut().unwrap();
            prov.split_lengths.push(1);
        }
    }
    bad
}

fn digitwise(n: &DigitString) -> DecompositionCert {
    let summands = n
        .digits()
        .iter()
        .enumerate()
        .filter(|(_, &d)| d != 0)
        .map(|(i, &d)| DigitString::new(n.base(), vec![d]).unwrap().shift(i))
        .collect();
    DecompositionCert::direct(n.clone(), summands)
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut pool: Vec<DecompositionCert> = Vec::new();
    for _ in 0..40 {
        let g = *[2u32, 3, 7, 10, 16].choose(&mut rng).unwrap();
        let len = rng.gen_range(1..40);
        let mut digits: Vec<u32> = (0..len).map(|_| rng.gen_range(0..g)).collect();
        digits[len - 1] = rng.gen_range(1..g);
        pool.push(digitwise(&DigitString::new(g, digits).unwrap()));
    }
    for _ in 0..10 {
        let (n, p) = lemma_root_instance(2, &mut rng);
        pool.push(decompose_part(&n, p, Mode::Guaranteed).unwrap());
    }
    let params = SClassParams::pipeline(1, 2);
    for seed in 0..2 {
        let n = sample_s(&params, 12_000, &mut ChaCha8Rng::seed_from_u64(7 + seed), 1_000).unwrap();
        if let Ok(cert) = decompose(&n, Mode::Guaranteed) {
            pool.push(cert);
        }
    }
    let mut mistakes = Vec::new();
    let mut corrupted = 0;
    for i in 0..1_000 {
        let base = pool.choose(&mut rng).unwrap();
        let bad = rng.gen_bool(0.5);
        let cert = if bad { corrupt(base, &mut rng) } else { base.clone() };
        corrupted += bad as usize;
        let back = DecompositionCert::from_json(&cert.to_json()).unwrap();
        if verify_cert(&back).is_valid() == bad {
            mistakes.push(i);
        }
    }
    outcome(
        mistakes.is_empty(),
        format!("1000 certificates ({corrupted} corrupted, pool {}), misjudged {mistakes:?}", pool.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("range-niven", range_niven),
        ("range-zuckerman", range_zuckerman),
        ("sumset-bound", dsh),
        ("split-join", split_join),
        ("single-block", lemma_root),
        ("pipeline", pipeline),
        ("counting", counting),
        ("density", density),
        ("certificates", round_trip),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let status = if result.passed { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {} {name}: {} ({:.1} s)",
            i + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
        failed += !result.passed as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
