use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use niven_core::decomposer::{calibrate_residues, default_residue};
use niven_core::rangelab::{count_niven_at, decade_checkpoints};
use niven_core::selftest::{dsh_suite, lemma_root_suite, split_suite, SuiteReport};
use niven_core::{
    decompose, estimate_density_s, is_zuckerman, sample_s, verify_cert, verify_range,
    DecompositionCert, DigitString, Kind, Mode, RangeConfig, SClassParams,
};

#[derive(Parser)]
#[command(name = "niven", version, about = "Sums of Niven numbers: decompositions, certificates and range checks")]
struct Cli {
    /// Worker threads (defaults to available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Niven and Zuckerman predicates for one number.
    Check {
        n: u64,
        #[arg(long, default_value_t = 10)]
        g: u32,
    },
    /// Decompose n into a bounded sum of Niven numbers and print the certificate.
    Decompose(DecomposeArgs),
    /// Check a certificate file.
    VerifyCert { file: PathBuf },
    /// Find every n ≤ N that is not a sum of at most k members.
    VerifyRange(RangeArgs),
    /// Count Niven numbers up to x at each power of ten.
    Count {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 10)]
        g: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Density of S_{q,r} in [1, N].
    Density {
        #[arg(long)]
        q: u64,
        #[arg(long, allow_negative_numbers = true)]
        r: i64,
        #[arg(long = "N")]
        n_max: u64,
        #[arg(long, default_value_t = 10)]
        g: u32,
    },
    /// Empirical scan of residues r' mod 420 for which the triple search succeeds.
    CalibrateResidues {
        #[arg(long)]
        g: u32,
        /// Size of s' to test around (default: 6000 (g-1)).
        #[arg(long)]
        magnitude: Option<u64>,
        #[arg(long, default_value_t = 4)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sumset bound, split/join and single-block property suites.
    Selftest {
        /// Smaller instance counts.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct DecomposeArgs {
    /// Decimal n, or a file holding a DigitString as JSON.
    #[arg(required_unless_present = "from_sample", conflicts_with = "from_sample")]
    input: Option<String>,
    /// Base for decimal input and samples.
    #[arg(long)]
    g: Option<u32>,
    /// Skip the size floor on the prime triple, the (S2) check and the per-part hypotheses.
    #[arg(long)]
    best_effort: bool,
    /// Decompose a random member of the pipeline class instead of an input.
    #[arg(long)]
    from_sample: bool,
    #[arg(long, requires = "from_sample")]
    len: Option<usize>,
    #[arg(long, requires = "from_sample", default_value_t = 0)]
    seed: u64,
    /// Residue of s - 18g mod 420 (default: first calibrated admissible odd residue).
    #[arg(long, requires = "from_sample")]
    r_prime: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RangeArgs {
    #[arg(long = "N")]
    n_max: u64,
    #[arg(long)]
    k: u32,
    #[arg(long, value_parser = clap::value_parser!(Kind))]
    kind: Kind,
    #[arg(long, default_value_t = 10)]
    g: u32,
    #[arg(long, default_value_t = 64)]
    trial_cap: u64,
    /// Comma-separated expected exceptions; the claim is that they match exactly.
    #[arg(long, value_delimiter = ',')]
    expect: Option<Vec<u64>>,
    /// CSV of exceptions (column n_exception).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report with the stats block.
    #[arg(long)]
    stats: Option<PathBuf>,
}

enum Failure {
    Usage(anyhow::Error),
    Claim(String),
    Exhausted(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if workers == 0 {
            eprintln!("error [usage]: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("error [usage]: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command, cli.format) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Claim(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error [usage]: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Exhausted(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command, format: Format) -> Outcome {
    match command {
        Command::Check { n, g } => check(n, g, format),
        Command::Decompose(args) => decompose_cmd(args),
        Command::VerifyCert { file } => verify_cert_cmd(&file, format),
        Command::VerifyRange(args) => verify_range_cmd(args, format),
        Command::Count { x, g, out } => count(x, g, out, format),
        Command::Density { q, r, n_max, g } => density(q, r, n_max, g, format),
        Command::CalibrateResidues { g, magnitude, samples, out } => {
            calibrate(g, magnitude, samples, out, format)
        }
        Command::Selftest { quick, seed } => selftest(quick, seed, format),
    }
}

fn check_base(g: u32) -> anyhow::Result<()> {
    if g < 2 {
        bail!("base must be at least 2, got {g}");
    }
    Ok(())
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    Ok(String::from_utf8(writer.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

fn check(n: u64, g: u32, format: Format) -> Outcome {
    check_base(g)?;
    if n == 0 {
        return Err(anyhow!("n must be positive").into());
    }
    let niven = DigitString::from_u64(n, g).map_err(|e| anyhow!("{e}"))?.is_niven();
    let zuckerman = is_zuckerman(n, g);
    let text = match format {
        Format::Json => {
            format!("{}\n", serde_json::json!({ "n": n, "g": g, "niven": niven, "zuckerman": zuckerman }))
        }
        Format::Csv => format!("n,g,niven,zuckerman\n{n},{g},{niven},{zuckerman}\n"),
        Format::Text => format!("niven: {niven}\nzuckerman: {zuckerman}\n"),
    };
    write_output(None, &text)?;
    Ok(())
}

fn read_digit_string(input: &str, g: Option<u32>) -> anyhow::Result<DigitString> {
    if !input.is_empty() && input.bytes().all(|b| b.is_ascii_digit()) {
        let n: u64 = input
            .parse()
            .map_err(|_| anyhow!("{input} does not fit in 64 bits; pass a DigitString JSON file instead"))?;
        let g = g.unwrap_or(10);
        check_base(g)?;
        return DigitString::from_u64(n, g).map_err(|e| anyhow!("{e}"));
    }
    let text = fs::read_to_string(input).with_context(|| format!("reading {input}"))?;
    let n: DigitString =
        serde_json::from_str(&text).with_context(|| format!("{input} is not a DigitString"))?;
    if let Some(g) = g {
        if g != n.base() {
            bail!("--g {g} disagrees with the base {} in {input}", n.base());
        }
    }
    Ok(n)
}

fn decompose_cmd(args: DecomposeArgs) -> Outcome {
    let n = if args.from_sample {
        let g = args.g.ok_or_else(|| anyhow!("--from-sample needs --g"))?;
        check_base(g)?;
        let len = args.len.ok_or_else(|| anyhow!("--from-sample needs --len"))?;
        let r_prime = match args.r_prime {
            Some(r) => r % 420,
            None => default_residue(g, len as u64 * (g as u64 - 1) / 2, 4).ok_or_else(|| {
                Failure::Exhausted("error [sample]: no admissible residue found".to_string())
            })?,
        };
        let params = SClassParams::pipeline(r_prime, g);
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        sample_s(&params, len, &mut rng, 1_000)
            .map_err(|e| Failure::Exhausted(format!("error [sample]: {e}")))?
    } else {
        read_digit_string(args.input.as_deref().expect("required by clap"), args.g)?
    };
    let mode = if args.best_effort { Mode::BestEffort } else { Mode::Guaranteed };
    let started = Instant::now();
    let cert = decompose(&n, mode).map_err(|e| {
        let msg = format!("error: {e}");
        if e.is_search_exhausted() {
            Failure::Exhausted(msg)
        } else {
            Failure::Claim(msg)
        }
    })?;
    write_output(args.out.as_deref(), &format!("{}\n", cert.to_json()))?;
    eprintln!(
        "summands: {} (cap {}), method: {}, {} ms",
        cert.summands.len(),
        cert.summand_cap().map_or("none".to_string(), |c| c.to_string()),
        cert.method.as_str(),
        started.elapsed().as_millis()
    );
    Ok(())
}

fn verify_cert_cmd(file: &Path, format: Format) -> Outcome {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let cert = DecompositionCert::from_json(&text)
        .map_err(|e| Failure::Claim(format!("invalid [parse]: {e}")))?;
    let verdict = verify_cert(&cert);
    let valid = verdict.is_valid();
    let text = match format {
        Format::Json => format!(
            "{}\n",
            serde_json::json!({
                "valid": valid,
                "method": cert.method.as_str(),
                "summands": cert.summands.len(),
                "reasons": verdict.reasons,
            })
        ),
        _ => format!("valid: {valid}\nmethod: {}\nsummands: {}\n", cert.method.as_str(), cert.summands.len()),
    };
    write_output(None, &text)?;
    if valid {
        Ok(())
    } else {
        let reasons: Vec<String> = verdict.reasons.iter().map(|r| format!("invalid [verify]: {r}")).collect();
        Err(Failure::Claim(reasons.join("\n")))
    }
}

#[derive(Serialize)]
struct ExceptionRow {
    n_exception: u64,
}

fn verify_range_cmd(args: RangeArgs, format: Format) -> Outcome {
    check_base(args.g)?;
    if args.k == 0 {
        return Err(anyhow!("--k must be at least 1").into());
    }
    if args.n_max > 100_000_000 {
        eprintln!(
            "warning: N = {} needs about {} MB and may take a long time",
            args.n_max,
            args.n_max / 8 / 1_000_000 * 3 + args.n_max / 5 / 1_000_000
        );
    }
    let mut config = RangeConfig::new(args.n_max, args.g, args.k, args.kind);
    config.trial_cap = args.trial_cap;
    let report = verify_range(&config).map_err(|e| anyhow!("{e}"))?;

    if let Some(path) = &args.out {
        let rows: Vec<ExceptionRow> = report.exceptions.iter().map(|&n| ExceptionRow { n_exception: n }).collect();
        let mut text = to_csv(&rows)?;
        if rows.is_empty() {
            text = "n_exception\n".to_string();
        }
        write_output(Some(path), &text)?;
    }
    if let Some(path) = &args.stats {
        write_output(Some(path), &format!("{}\n", serde_json::to_string_pretty(&report).map_err(|e| anyhow!(e))?))?;
    }
    let text = match format {
        Format::Json => format!("{}\n", serde_json::to_string(&report).map_err(|e| anyhow!(e))?),
        Format::Csv => {
            let mut t = String::from("n_exception\n");
            for n in &report.exceptions {
                t.push_str(&format!("{n}\n"));
            }
            t
        }
        Format::Text => {
            let mut t = format!("exceptions: {}\n", report.exceptions.len());
            let shown: Vec<String> = report.exceptions.iter().take(50).map(|n| n.to_string()).collect();
            if !shown.is_empty() {
                let more = if report.exceptions.len() > 50 { ", ..." } else { "" };
                t.push_str(&format!("list: {}{more}\n", shown.join(", ")));
            }
            t.push_str(&format!(
                "members: {}\nproven: {}\nsummands: {:?}\n",
                report.stats.member_count, report.exceptions_proven, report.stats.summand_histogram
            ));
            t
        }
    };
    write_output(None, &text)?;
    eprintln!("time: {} ms", report.stats.wall_time_ms);

    let expected = args.expect.unwrap_or_default();
    if report.exceptions != expected {
        return Err(Failure::Claim(format!(
            "claim fails [verify-range]: expected exceptions {expected:?}, found {} ({:?}{})",
            report.exceptions.len(),
            &report.exceptions[..report.exceptions.len().min(10)],
            if report.exceptions.len() > 10 { ", ..." } else { "" }
        )));
    }
    if !report.exceptions_proven {
        return Err(Failure::Claim("claim fails [verify-range]: exceptions not confirmed by exhaustion".into()));
    }
    Ok(())
}

fn count(x: u64, g: u32, out: Option<PathBuf>, format: Format) -> Outcome {
    check_base(g)?;
    if x < 10 {
        return Err(anyhow!("--x must be at least 10").into());
    }
    let rows = count_niven_at(&decade_checkpoints(x), g);
    let text = match format {
        Format::Json => format!("{}\n", serde_json::to_string(&rows).map_err(|e| anyhow!(e))?),
        _ => to_csv(&rows)?,
    };
    write_output(out.as_deref(), &text)?;
    Ok(())
}

fn density(q: u64, r: i64, n_max: u64, g: u32, format: Format) -> Outcome {
    check_base(g)?;
    if q == 0 || n_max == 0 {
        return Err(anyhow!("--q and --N must be positive").into());
    }
    let params = SClassParams::new(q, r, g);
    let d = estimate_density_s(&params, n_max);
    let lower = 1.0 / (2.0 * (g as f64).powi(q as i32 + 1));
    let text = match format {
        Format::Json => format!(
            "{}\n",
            serde_json::json!({ "q": q, "r": r, "g": g, "N": n_max, "density": d, "lower_bound": lower })
        ),
        Format::Csv => format!("q,r,g,N,density,lower_bound\n{q},{r},{g},{n_max},{d},{lower}\n"),
        Format::Text => format!("density: {d:.6}\nlower bound: {lower:e}\n"),
    };
    write_output(None, &text)?;
    Ok(())
}

#[derive(Serialize)]
struct ResidueRow {
    residue: u64,
    successes: usize,
    trials: usize,
    admissible: bool,
}

fn calibrate(g: u32, magnitude: Option<u64>, samples: usize, out: Option<PathBuf>, format: Format) -> Outcome {
    check_base(g)?;
    if samples == 0 {
        return Err(anyhow!("--samples must be positive").into());
    }
    let magnitude = magnitude.unwrap_or(6_000 * (g as u64 - 1)).max(420);
    let rows: Vec<ResidueRow> = calibrate_residues(g, magnitude, samples)
        .into_iter()
        .map(|s| ResidueRow { residue: s.residue, successes: s.successes, trials: s.trials, admissible: s.admissible() })
        .collect();
    let admissible = rows.iter().filter(|r| r.admissible).count();
    let text = match format {
        Format::Json => format!("{}\n", serde_json::to_string(&rows).map_err(|e| anyhow!(e))?),
        _ => to_csv(&rows)?,
    };
    write_output(out.as_deref(), &text)?;
    eprintln!("admissible: {admissible} of 420 residues near s' = {magnitude}");
    Ok(())
}

fn selftest(quick: bool, seed: u64, format: Format) -> Outcome {
    let (p_max, random, split_n, root_n) = if quick { (7, 500, 200, 5) } else { (13, 10_000, 10_000, 100) };
    let reports: Vec<SuiteReport> = vec![
        dsh_suite(p_max, random, 101, seed),
        split_suite(&[2, 3, 10, 16], split_n, seed),
        lemma_root_suite(2, root_n, seed),
    ];
    let text = match format {
        Format::Json => format!("{}\n", serde_json::to_string(&reports).map_err(|e| anyhow!(e))?),
        _ => reports
            .iter()
            .map(|r| {
                format!(
                    "{} {}: {} checked, {} violations\n",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.checked,
                    r.violations.len()
                )
            })
            .collect(),
    };
    write_output(None, &text)?;
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .flat_map(|r| r.violations.iter().map(move |v| format!("violation [{}]: {v}", r.name)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Claim(failed.join("\n")))
    }
}
