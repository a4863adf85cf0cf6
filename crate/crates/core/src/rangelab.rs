//! Exhaustive range verification for sums of Niven and Zuckerman numbers,
//! Niven counting, and density of the classes `S_{q,r}`.
//!
//! All tables are bitsets indexed by `n`. Work is split into contiguous,
//! word-aligned chunks processed independently with rayon; results are merged
//! in chunk order so they never depend on the worker count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposer::{is_in_s, SClassParams};
use crate::digits::{is_zuckerman, DigitString};

// Numbers per parallel chunk; a multiple of 64 so chunks own whole words.
const CHUNK: u64 = 1 << 16;
// Levels with at most this many members use whole-table shift-or.
const SHIFT_OR_MAX_MEMBERS: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RangeError {
    #[error("range bound {0} exceeds the supported maximum {max}", max = u32::MAX)]
    TooLarge(u64),
    #[error("base {0} is smaller than 2")]
    InvalidBase(u32),
    #[error("summand cap must be at least 1")]
    ZeroCap,
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// Fixed-size bitset over `0..len`.
#[derive(Clone, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
    len: u64,
}

impl Bitset {
    pub fn new(len: u64) -> Self {
        Bitset { words: vec![0; len.div_ceil(64) as usize], len }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: u64) -> bool {
        i < self.len && self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: u64) {
        assert!(i < self.len, "bit {i} out of range");
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as u64;
                bits &= bits - 1;
                Some(w as u64 * 64 + b)
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl std::fmt::Debug for Bitset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Bitset({} of {} set)", self.count_ones(), self.len)
    }
}

/// Digit counter that walks `n, n+1, …` keeping the digit sum current.
struct DigitCounter {
    base: u32,
    digits: Vec<u32>,
    sum: u64,
}

impl DigitCounter {
    fn starting_at(n: u64, base: u32) -> Self {
        let digits = match DigitString::from_u64(n, base) {
            Ok(d) => d.digits().to_vec(),
            Err(_) => vec![0],
        };
        let sum = digits.iter().map(|&d| d as u64).sum();
        DigitCounter { base, digits, sum }
    }

    #[inline]
    fn increment(&mut self) {
        let mut i = 0;
        loop {
            if i == self.digits.len() {
                self.digits.push(1);
                self.sum += 1;
                return;
            }
            if self.digits[i] + 1 < self.base {
                self.digits[i] += 1;
                self.sum += 1;
                return;
            }
            self.sum -= (self.base - 1) as u64;
            self.digits[i] = 0;
            i += 1;
        }
    }

    #[inline]
    fn product_nonzero(&self) -> Option<u64> {
        self.digits.iter().try_fold(1u64, |acc, &d| (d != 0).then(|| acc * d as u64))
    }
}

fn chunks(n_max: u64) -> Vec<(u64, u64)> {
    (0..=n_max / CHUNK)
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK - 1).min(n_max)))
        .collect()
}

// Builds a table over 0..=n_max, one chunk of words at a time.
fn build_table<F>(n_max: u64, fill: F) -> Bitset
where
    F: Fn(u64, u64, &mut [u64]) + Sync,
{
    let mut table = Bitset::new(n_max + 1);
    let words_per_chunk = (CHUNK / 64) as usize;
    table
        .words
        .par_chunks_mut(words_per_chunk)
        .enumerate()
        .for_each(|(c, words)| {
            let lo = c as u64 * CHUNK;
            let hi = (lo + CHUNK - 1).min(n_max);
            fill(lo, hi, words);
        });
    table
}

/// Bit `n` set iff `n` is a base-g Niven number, `1 ≤ n ≤ n_max`. Digit sums
/// are carried along incrementally.
pub fn niven_sieve(n_max: u64, g: u32) -> Bitset {
    build_table(n_max, |lo, hi, words| {
        let mut counter = DigitCounter::starting_at(lo, g);
        for n in lo..=hi {
            if n > 0 && n % counter.sum == 0 {
                let off = n - lo;
                words[(off / 64) as usize] |= 1 << (off % 64);
            }
            counter.increment();
        }
    })
}

/// Bit `n` set iff `n` is a base-g Zuckerman number, `1 ≤ n ≤ n_max`.
pub fn zuckerman_sieve(n_max: u64, g: u32) -> Bitset {
    build_table(n_max, |lo, hi, words| {
        let mut counter = DigitCounter::starting_at(lo, g);
        for n in lo..=hi {
            if n > 0 {
                if let Some(prod) = counter.product_nonzero() {
                    if n % prod == 0 {
                        let off = n - lo;
                        words[(off / 64) as usize] |= 1 << (off % 64);
                    }
                }
            }
            counter.increment();
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Niven,
    Zuckerman,
}

impl std::str::FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "niven" => Ok(Kind::Niven),
            "zuckerman" => Ok(Kind::Zuckerman),
            other => Err(format!("unknown kind {other:?} (expected niven or zuckerman)")),
        }
    }
}

/// Membership table with the members also listed in ascending order.
#[derive(Debug, Clone)]
pub struct MemberTable {
    pub kind: Kind,
    pub g: u32,
    pub bits: Bitset,
    pub list: Vec<u32>,
}

impl MemberTable {
    pub fn build(kind: Kind, n_max: u64, g: u32) -> Result<Self, RangeError> {
        if n_max > u32::MAX as u64 {
            return Err(RangeError::TooLarge(n_max));
        }
        if g < 2 {
            return Err(RangeError::InvalidBase(g));
        }
        let bits = match kind {
            Kind::Niven => niven_sieve(n_max, g),
            Kind::Zuckerman => zuckerman_sieve(n_max, g),
        };
        let list = bits.ones().map(|n| n as u32).collect();
        Ok(MemberTable { kind, g, bits, list })
    }

    pub fn n_max(&self) -> u64 {
        self.bits.len() - 1
    }

    pub fn contains(&self, n: u64) -> bool {
        self.bits.get(n)
    }

    fn members_up_to(&self, n: u64) -> &[u32] {
        let end = self.list.partition_point(|&a| a as u64 <= n);
        &self.list[..end]
    }
}

/// Least number of members summing to `n`, if at most `cap`.
///
/// Iterative deepening over non-increasing sequences of members.
pub fn min_summands(n: u64, cap: u32, table: &MemberTable) -> Option<u32> {
    assert!(n <= table.n_max(), "n = {n} beyond the table");
    if n == 0 {
        return Some(0);
    }
    (1..=cap).find(|&t| representable(n, t, n, table))
}

// `n` as a sum of at most `t` members, each at most `largest`.
fn representable(n: u64, t: u32, largest: u64, table: &MemberTable) -> bool {
    if n == 0 {
        return true;
    }
    if t == 0 {
        return false;
    }
    if t == 1 {
        return n <= largest && table.contains(n);
    }
    let members = table.members_up_to(n.min(largest));
    // the largest summand is at least n / t
    let smallest_top = n.div_ceil(t as u64);
    for &a in members.iter().rev() {
        let a = a as u64;
        if a < smallest_top {
            break;
        }
        if representable(n - a, t - 1, a, table) {
            return true;
        }
    }
    false
}

/// [`min_summands`] over a Niven table.
pub fn min_niven_summands(n: u64, cap: u32, sieve: &MemberTable) -> Option<u32> {
    debug_assert_eq!(sieve.kind, Kind::Niven);
    min_summands(n, cap, sieve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelStrategy {
    /// Per-n search over first summands with early exit.
    Search,
    /// Whole-table shift-or over every member.
    ShiftOr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SieveStats {
    pub member_count: u64,
    /// Entry `j` counts the `n` whose least number of summands is `j + 1`.
    pub summand_histogram: Vec<u64>,
    /// Entry `b` counts searched `n` needing `[2^b, 2^(b+1))` first-summand trials.
    pub trials_histogram: Vec<u64>,
    /// Searches that ran past the trial cap into the exhaustive scan.
    pub fallbacks: u64,
    pub strategies: Vec<LevelStrategy>,
    /// Left out of serialized reports so they are reproducible byte for byte.
    #[serde(skip)]
    pub wall_time_ms: u64,
}

/// Result of [`verify_range`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SieveReport {
    pub g: u32,
    #[serde(rename = "N")]
    pub n_max: u64,
    pub k: u32,
    pub kind: Kind,
    pub exceptions: Vec<u64>,
    /// Every exception re-checked by enumerating all multisets of members.
    pub exceptions_proven: bool,
    pub stats: SieveStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeConfig {
    pub n_max: u64,
    pub g: u32,
    pub k: u32,
    pub kind: Kind,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
    /// First-summand trials before the search is counted as a fallback.
    pub trial_cap: u64,
}

impl RangeConfig {
    pub fn new(n_max: u64, g: u32, k: u32, kind: Kind) -> Self {
        RangeConfig { n_max, g, k, kind, workers: None, trial_cap: 64 }
    }
}

/// Determines every `n ≤ N` that is not a sum of at most `k` members.
///
/// `covered` starts as `{0}` (the empty sum); each level adds
/// `covered + members`. Dense member sets are handled by a per-n search over
/// ascending first summands with early exit, sparse ones by shifting the whole
/// table once per member. Either way the outcome is exact.
pub fn verify_range(config: &RangeConfig) -> Result<SieveReport, RangeError> {
    if config.k == 0 {
        return Err(RangeError::ZeroCap);
    }
    match config.workers {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| RangeError::Pool(e.to_string()))?
            .install(|| verify_range_inner(config)),
        None => verify_range_inner(config),
    }
}

fn verify_range_inner(config: &RangeConfig) -> Result<SieveReport, RangeError> {
    let started = Instant::now();
    let table = MemberTable::build(config.kind, config.n_max, config.g)?;
    let n_max = config.n_max;

    let mut covered = table.bits.clone();
    covered.set(0);
    let mut summand_histogram = vec![0u64; config.k as usize];
    summand_histogram[0] = table.list.len() as u64;
    let mut trials_histogram = vec![0u64; 64];
    let mut fallbacks = 0;
    let mut strategies = vec![LevelStrategy::Search];

    for level in 2..=config.k {
        let before = covered.count_ones();
        let next = if table.list.len() <= SHIFT_OR_MAX_MEMBERS {
            strategies.push(LevelStrategy::ShiftOr);
            shift_or_level(&covered, &table.list)
        } else {
            strategies.push(LevelStrategy::Search);
            let (next, hist, fb) = search_level(&covered, &table, level, config.trial_cap);
            for (slot, v) in trials_histogram.iter_mut().zip(hist) {
                *slot += v;
            }
            fallbacks += fb;
            next
        };
        covered = next;
        summand_histogram[level as usize - 1] = covered.count_ones() - before;
        if covered.count_ones() == n_max + 1 {
            break;
        }
    }
    while trials_histogram.last() == Some(&0) {
        trials_histogram.pop();
    }

    let exceptions: Vec<u64> = (1..=n_max).filter(|&n| !covered.get(n)).collect();
    let exceptions_proven = exceptions
        .par_iter()
        .all(|&n| prove_unrepresentable(n, config.k, &table));

    Ok(SieveReport {
        g: config.g,
        n_max,
        k: config.k,
        kind: config.kind,
        exceptions,
        exceptions_proven,
        stats: SieveStats {
            member_count: table.list.len() as u64,
            summand_histogram,
            trials_histogram,
            fallbacks,
            strategies,
            wall_time_ms: started.elapsed().as_millis() as u64,
        },
    })
}

// covered ∪ (covered + a) for every member a.
fn shift_or_level(covered: &Bitset, members: &[u32]) -> Bitset {
    let mut next = covered.clone();
    let len = covered.len;
    let words_per_chunk = (CHUNK / 64) as usize;
    let src = &covered.words;
    next.words
        .par_chunks_mut(words_per_chunk)
        .enumerate()
        .for_each(|(c, dst)| {
            let first = c * words_per_chunk;
            for &a in members {
                let (q, r) = ((a / 64) as usize, a % 64);
                for (i, word) in dst.iter_mut().enumerate() {
                    let w = first + i;
                    if w < q {
                        continue;
                    }
                    let mut v = src[w - q] << r;
                    if r > 0 && w > q {
                        v |= src[w - q - 1] >> (64 - r);
                    }
                    *word |= v;
                }
            }
        });
    let tail = len % 64;
    if tail != 0 {
        *next.words.last_mut().unwrap() &= (1u64 << tail) - 1;
    }
    next
}

// Per-n search: is some member a with n - a already covered?
fn search_level(
    covered: &Bitset,
    table: &MemberTable,
    level: u32,
    trial_cap: u64,
) -> (Bitset, Vec<u64>, u64) {
    let n_max = covered.len - 1;
    let results: Vec<(Vec<u64>, Vec<u64>, u64)> = chunks(n_max)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut words = vec![0u64; ((hi - lo) / 64 + 1) as usize];
            let mut hist = vec![0u64; 64];
            let mut fallbacks = 0;
            for n in lo..=hi {
                if covered.get(n) {
                    continue;
                }
                // with two summands both are members, so a ≤ n/2 suffices
                let limit = if level == 2 { n / 2 } else { n };
                let members = table.members_up_to(limit);
                let mut trials = 0u64;
                let mut found = false;
                for &a in members {
                    trials += 1;
                    if trials == trial_cap + 1 {
                        fallbacks += 1;
                    }
                    if covered.get(n - a as u64) {
                        found = true;
                        break;
                    }
                }
                if trials > 0 {
                    hist[63 - trials.leading_zeros() as usize] += 1;
                }
                if found {
                    let off = n - lo;
                    words[(off / 64) as usize] |= 1 << (off % 64);
                }
            }
            (words, hist, fallbacks)
        })
        .collect();

    let mut next = covered.clone();
    let mut hist = vec![0u64; 64];
    let mut fallbacks = 0;
    for ((lo, _), (words, h, fb)) in chunks(n_max).into_iter().zip(results) {
        let first = (lo / 64) as usize;
        for (i, w) in words.into_iter().enumerate() {
            next.words[first + i] |= w;
        }
        for (slot, v) in hist.iter_mut().zip(h) {
            *slot += v;
        }
        fallbacks += fb;
    }
    (next, hist, fallbacks)
}

/// True iff no multiset of at most `k` members sums to `n`, by enumerating
/// every non-increasing sequence of members.
pub fn prove_unrepresentable(n: u64, k: u32, table: &MemberTable) -> bool {
    fn any_sum(rest: u64, left: u32, largest: u64, members: &[u32]) -> bool {
        if rest == 0 {
            return true;
        }
        if left == 0 {
            return false;
        }
        members
            .iter()
            .rev()
            .map(|&a| a as u64)
            .filter(|&a| a <= largest && a <= rest)
            .any(|a| any_sum(rest - a, left - 1, a, members))
    }
    !any_sum(n, k, n, table.members_up_to(n))
}

/// One row of a Niven count: `c_estimate = count · ln(x) / x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub x: u64,
    pub count: u64,
    pub c_estimate: f64,
}

fn count_niven_between(lo: u64, hi: u64, g: u32) -> u64 {
    if lo > hi {
        return 0;
    }
    let pieces: Vec<(u64, u64)> = (lo..=hi)
        .step_by(CHUNK as usize)
        .map(|start| (start, (start + CHUNK - 1).min(hi)))
        .collect();
    pieces
        .into_par_iter()
        .map(|(a, b)| {
            let mut counter = DigitCounter::starting_at(a, g);
            let mut count = 0;
            for n in a..=b {
                if n > 0 && n % counter.sum == 0 {
                    count += 1;
                }
                counter.increment();
            }
            count
        })
        .sum()
}

/// Number of base-g Niven numbers up to `x`, with `count · ln x / x`.
pub fn count_niven(x: u64, g: u32) -> CountRow {
    count_niven_at(&[x], g)[0]
}

/// [`count_niven`] at several ascending checkpoints in one pass.
pub fn count_niven_at(checkpoints: &[u64], g: u32) -> Vec<CountRow> {
    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut total = 0;
    let mut done = 0;
    for &x in checkpoints {
        assert!(x >= done, "checkpoints must ascend");
        total += count_niven_between(done + 1, x, g);
        done = x;
        let c_estimate = if x >= 2 { total as f64 * (x as f64).ln() / x as f64 } else { f64::NAN };
        rows.push(CountRow { x, count: total, c_estimate });
    }
    rows
}

/// Powers of ten up to `x`, plus `x` itself.
pub fn decade_checkpoints(x: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(10u64), |d| d.checked_mul(10))
        .take_while(|&d| d <= x)
        .collect();
    if out.last() != Some(&x) {
        out.push(x);
    }
    out
}

/// `|S_{q,r} ∩ [1, N]| / N` by direct scan.
pub fn estimate_density_s(params: &SClassParams, n_max: u64) -> f64 {
    if n_max == 0 {
        return 0.0;
    }
    let members: u64 = chunks(n_max)
        .into_par_iter()
        .map(|(lo, hi)| {
            (lo.max(1)..=hi)
                .filter(|&n| {
                    let d = DigitString::from_u64(n, params.g).expect("n ≥ 1, g ≥ 2");
                    is_in_s(&d, params)
                })
                .count() as u64
        })
        .sum();
    members as f64 / n_max as f64
}

/// Independent per-n check for Zuckerman tables.
pub fn zuckerman_agrees(n_max: u64, g: u32) -> bool {
    let table = zuckerman_sieve(n_max, g);
    (0..=n_max).all(|n| table.get(n) == is_zuckerman(n, g))
}
