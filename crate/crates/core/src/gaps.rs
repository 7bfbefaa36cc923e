//! The largest gap between consecutive prime factors on a log-log scale.
//!
//! For `n` with distinct primes `p_1 < ... < p_w`, `g(n)` is the largest
//! ratio `ln p_{j+1} / ln p_j` and `f(n) = ln g(n)`. Range scans collect a
//! histogram of `f(n) - ln ln ln n` and, for each threshold `c`, how many
//! integers satisfy `g(n) > c ln ln n`. Every accumulator is an integer
//! (the moments are fixed point), so summaries merge exactly and a scan
//! gives bit-identical results under any segmentation or worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::error::{invalid, Error, Result};
use crate::sieve::{Factorization, PrimeTable, SegmentScanner, DEFAULT_SEGMENT_SIZE};

/// Integers below this are never eligible: `ln ln 16 > 1.0`.
pub const ELIGIBILITY_FLOOR: u64 = 16;
pub const HISTOGRAM_MIN: f64 = -10.0;
pub const HISTOGRAM_MAX: f64 = 10.0;
pub const HISTOGRAM_BIN_WIDTH: f64 = 0.05;
pub const HISTOGRAM_BINS: usize = 400;
/// Number of alternating partial sums carried by a [`DensityReport`].
pub const PARTIAL_SUM_TERMS: usize = 9;

const FIXED_POINT_SCALE: f64 = (1u64 << 40) as f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapProfile {
    pub n: u64,
    pub omega: usize,
    pub f: Option<f64>,
    pub g: Option<f64>,
    /// 1-based index `j` of the maximizing ratio; smallest on ties.
    pub argmax: Option<usize>,
}

pub fn gap_profile(fact: &Factorization) -> GapProfile {
    let max = max_log_ratio(fact.primes(), |p| (p as f64).ln());
    GapProfile {
        n: fact.n(),
        omega: fact.omega(),
        f: max.map(|(g, _)| g.ln()),
        g: max.map(|(g, _)| g),
        argmax: max.map(|(_, j)| j),
    }
}

fn max_log_ratio<I, L>(primes: I, ln: L) -> Option<(f64, usize)>
where
    I: Iterator<Item = u64>,
    L: Fn(u64) -> f64,
{
    let mut logs = primes.map(ln);
    let mut prev = logs.next()?;
    let mut best: Option<(f64, usize)> = None;
    for (j, cur) in logs.enumerate() {
        let ratio = cur / prev;
        if best.is_none_or(|(g, _)| ratio > g) {
            best = Some((ratio, j + 1));
        }
        prev = cur;
    }
    best
}

/// Which `x` enters the exceedance threshold `c ln ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    /// `g(n) > c ln ln n`.
    #[default]
    PerN,
    /// `g(n) > c ln ln x` for a fixed reference `x`.
    PerRange,
}

/// Thresholds and binning shared by summaries that may be merged.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    thresholds: Vec<f64>,
    range_x: Option<u64>,
}

impl ScanConfig {
    /// Thresholds are sorted and deduplicated; each must be finite and positive.
    pub fn new(thresholds: &[f64]) -> Result<Self> {
        if let Some(bad) = thresholds.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return invalid(format!("threshold c must be finite and > 0, got {bad}"));
        }
        let mut thresholds = thresholds.to_vec();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        Ok(ScanConfig {
            thresholds,
            range_x: None,
        })
    }

    /// Also count `g(n) > c ln ln x` against the fixed reference `x`.
    pub fn with_range_reference(mut self, x: u64) -> Result<Self> {
        if x < ELIGIBILITY_FLOOR {
            return invalid(format!("range reference x must be >= 16, got {x}"));
        }
        self.range_x = Some(x);
        Ok(self)
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn range_x(&self) -> Option<u64> {
        self.range_x
    }

    fn index_of(&self, c: f64) -> Option<usize> {
        self.thresholds.iter().position(|&t| t == c)
    }
}

/// Fixed bins over `[HISTOGRAM_MIN, HISTOGRAM_MAX)` plus two overflow bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    pub underflow: u64,
    pub bins: Vec<u64>,
    pub overflow: u64,
}

impl Default for Histogram {
    fn default() -> Self {
        Histogram {
            underflow: 0,
            bins: vec![0; HISTOGRAM_BINS],
            overflow: 0,
        }
    }
}

impl Histogram {
    fn record(&mut self, v: f64) {
        if v < HISTOGRAM_MIN {
            self.underflow += 1;
            return;
        }
        let idx = ((v - HISTOGRAM_MIN) / HISTOGRAM_BIN_WIDTH).floor();
        if idx >= HISTOGRAM_BINS as f64 || v.is_nan() {
            self.overflow += 1;
        } else {
            self.bins[idx as usize] += 1;
        }
    }

    /// Lower edge of bin `i`; `edge(HISTOGRAM_BINS)` is the upper edge.
    pub fn edge(i: usize) -> f64 {
        HISTOGRAM_MIN + i as f64 * HISTOGRAM_BIN_WIDTH
    }

    pub fn total(&self) -> u64 {
        self.underflow + self.overflow + self.bins.iter().sum::<u64>()
    }

    fn add(&mut self, other: &Histogram) {
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
    }
}

/// Mergeable statistics of `f(n)` over a set of disjoint integer ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSummary {
    config: ScanConfig,
    ranges: Vec<(u64, u64)>,
    total: u64,
    eligible: u64,
    histogram: Histogram,
    exceed: Vec<u64>,
    exceed_range: Vec<u64>,
    sum_f: u128,
    sum_f2: u128,
}

impl ScanSummary {
    /// The identity for [`merge_summaries`].
    pub fn empty(config: &ScanConfig) -> Self {
        let k = config.thresholds.len();
        ScanSummary {
            config: config.clone(),
            ranges: Vec::new(),
            total: 0,
            eligible: 0,
            histogram: Histogram::default(),
            exceed: vec![0; k],
            exceed_range: if config.range_x.is_some() { vec![0; k] } else { Vec::new() },
            sum_f: 0,
            sum_f2: 0,
        }
    }

    pub fn config(&self) -> &ScanConfig {
        &self.config
    }

    /// Sorted, coalesced half-open ranges.
    pub fn ranges(&self) -> &[(u64, u64)] {
        &self.ranges
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn eligible(&self) -> u64 {
        self.eligible
    }

    pub fn histogram(&self) -> &Histogram {
        &self.histogram
    }

    /// Per-n exceedance counts, parallel to `config().thresholds()`.
    pub fn exceed(&self) -> &[u64] {
        &self.exceed
    }

    /// Per-range exceedance counts; empty without a range reference.
    pub fn exceed_range(&self) -> &[u64] {
        &self.exceed_range
    }

    pub fn exceed_for(&self, c: f64, mode: ThresholdMode) -> Option<u64> {
        let i = self.config.index_of(c)?;
        match mode {
            ThresholdMode::PerN => self.exceed.get(i).copied(),
            ThresholdMode::PerRange => self.exceed_range.get(i).copied(),
        }
    }

    /// Largest integer covered, if any.
    pub fn last_n(&self) -> Option<u64> {
        self.ranges.last().map(|&(_, b)| b - 1)
    }

    pub fn mean_f(&self) -> Option<f64> {
        (self.eligible > 0).then(|| self.sum_f as f64 / FIXED_POINT_SCALE / self.eligible as f64)
    }

    /// Population variance of `f` over eligible integers.
    pub fn var_f(&self) -> Option<f64> {
        let mean = self.mean_f()?;
        let second = self.sum_f2 as f64 / FIXED_POINT_SCALE / self.eligible as f64;
        Some((second - mean * mean).max(0.0))
    }

    fn record(&mut self, fact: &Factorization, ln: &LnCache, range_lnln: Option<f64>) {
        let n = fact.n();
        if n < ELIGIBILITY_FLOOR || fact.omega() < 2 {
            return;
        }
        let Some((g, _)) = max_log_ratio(fact.primes(), |p| ln.get(p)) else {
            return;
        };
        let f = g.ln();
        let lnln = (n as f64).ln().ln();
        self.eligible += 1;
        self.histogram.record(f - lnln.ln());
        for (count, &c) in self.exceed.iter_mut().zip(&self.config.thresholds) {
            if g > c * lnln {
                *count += 1;
            }
        }
        if let Some(ref_lnln) = range_lnln {
            for (count, &c) in self.exceed_range.iter_mut().zip(&self.config.thresholds) {
                if g > c * ref_lnln {
                    *count += 1;
                }
            }
        }
        self.sum_f += (f * FIXED_POINT_SCALE).round() as u128;
        self.sum_f2 += (f * f * FIXED_POINT_SCALE).round() as u128;
    }
}

/// `ln p` for small primes, looked up instead of recomputed.
struct LnCache {
    values: Vec<f64>,
}

impl LnCache {
    const MAX_DENSE: u64 = 1 << 22;

    fn new(limit: u64) -> Self {
        let len = limit.min(Self::MAX_DENSE) as usize + 1;
        LnCache {
            values: (0..len).map(|v| (v as f64).ln()).collect(),
        }
    }

    fn get(&self, p: u64) -> f64 {
        match self.values.get(p as usize) {
            Some(&v) => v,
            None => (p as f64).ln(),
        }
    }
}

/// Parallelism and segmentation knobs; neither affects the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    pub workers: usize,
    pub segment_size: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            workers: 1,
            segment_size: DEFAULT_SEGMENT_SIZE,
        }
    }
}

/// Single-threaded scan of `[a, b)`.
pub fn scan_range(a: u64, b: u64, config: &ScanConfig, table: &PrimeTable) -> Result<ScanSummary> {
    scan_range_with(a, b, config, table, ScanOptions::default())
}

/// Scans `[a, b)` in `segment_size` chunks shared among `workers` threads.
pub fn scan_range_with(
    a: u64,
    b: u64,
    config: &ScanConfig,
    table: &PrimeTable,
    options: ScanOptions,
) -> Result<ScanSummary> {
    if a < ELIGIBILITY_FLOOR || a >= b {
        return invalid(format!("scan range must satisfy 16 <= a < b, got [{a}, {b})"));
    }
    if options.workers == 0 || options.segment_size == 0 {
        return invalid("workers and segment size must be positive");
    }
    // validates the table once for the whole range
    SegmentScanner::new(a, b, table)?;
    let ln = LnCache::new(crate::sieve::isqrt(b - 1).min(table.limit()));
    let range_lnln = config.range_x.map(|x| (x as f64).ln().ln());

    let chunk = options.segment_size as u64;
    let chunks = (b - a).div_ceil(chunk) as usize;
    let scan_chunk = |i: usize| -> Result<ScanSummary> {
        let lo = a + i as u64 * chunk;
        let hi = b.min(lo + chunk);
        let mut summary = ScanSummary::empty(config);
        SegmentScanner::new(lo, hi, table)?
            .with_segment_size(options.segment_size)?
            .for_each(|fact| summary.record(fact, &ln, range_lnln));
        summary.ranges.push((lo, hi));
        summary.total = hi - lo;
        Ok(summary)
    };

    let workers = options.workers.min(chunks);
    let parts: Vec<ScanSummary> = if workers <= 1 {
        (0..chunks).map(scan_chunk).collect::<Result<_>>()?
    } else {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Result<ScanSummary>>>> = Mutex::new(vec![None; chunks]);
        thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= chunks {
                        break;
                    }
                    let part = scan_chunk(i);
                    slots.lock().expect("scan slots")[i] = Some(part);
                });
            }
        });
        slots
            .into_inner()
            .expect("scan slots")
            .into_iter()
            .map(|slot| slot.expect("every chunk scanned"))
            .collect::<Result<_>>()?
    };

    parts
        .into_iter()
        .try_fold(ScanSummary::empty(config), |acc, part| merge_summaries(&acc, &part))
}

/// Adds two summaries over disjoint ranges with identical configuration.
pub fn merge_summaries(s1: &ScanSummary, s2: &ScanSummary) -> Result<ScanSummary> {
    if s1.config != s2.config {
        return invalid("cannot merge summaries with different thresholds or range reference");
    }
    let mut ranges: Vec<(u64, u64)> = s1.ranges.iter().chain(&s2.ranges).copied().collect();
    ranges.sort_unstable();
    let mut coalesced: Vec<(u64, u64)> = Vec::with_capacity(ranges.len());
    for (lo, hi) in ranges {
        match coalesced.last_mut() {
            Some(last) if lo < last.1 => {
                return invalid(format!("ranges overlap at [{lo}, {})", hi.min(last.1)));
            }
            Some(last) if lo == last.1 => last.1 = hi,
            _ => coalesced.push((lo, hi)),
        }
    }
    let mut out = s1.clone();
    out.ranges = coalesced;
    out.total += s2.total;
    out.eligible += s2.eligible;
    out.histogram.add(&s2.histogram);
    for (a, b) in out.exceed.iter_mut().zip(&s2.exceed) {
        *a += b;
    }
    for (a, b) in out.exceed_range.iter_mut().zip(&s2.exceed_range) {
        *a += b;
    }
    out.sum_f += s2.sum_f;
    out.sum_f2 += s2.sum_f2;
    Ok(out)
}

/// `1 - e^(-1/c)`.
pub fn theoretical_density(c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return invalid(format!("c must be > 0, got {c}"));
    }
    Ok(-(-1.0 / c).exp_m1())
}

/// `sum_{k=0}^{K} (-1)^k / (c^k k!)`, the truncated series for `e^(-1/c)`.
pub fn partial_alternating_sum(c: f64, k_max: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=k_max {
        term *= -1.0 / (c * k as f64);
        sum += term;
    }
    sum
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub c: f64,
    /// Largest integer in the scanned ranges.
    pub x: u64,
    pub mode: ThresholdMode,
    pub empirical: f64,
    pub theoretical: f64,
    /// Partial sums for `K = 0..PARTIAL_SUM_TERMS`.
    pub partial_sums: Vec<f64>,
}

impl DensityReport {
    pub fn deviation(&self) -> f64 {
        self.empirical - self.theoretical
    }
}

pub fn empirical_density(s: &ScanSummary, c: f64, mode: ThresholdMode) -> Result<DensityReport> {
    let Some(count) = s.exceed_for(c, mode) else {
        return invalid(match mode {
            ThresholdMode::PerN => format!("threshold c = {c} was not configured"),
            ThresholdMode::PerRange => {
                format!("threshold c = {c} has no per-range count (unknown c or no range reference)")
            }
        });
    };
    if s.eligible == 0 {
        return Err(Error::EmptySample);
    }
    Ok(DensityReport {
        c,
        x: s.last_n().unwrap_or(0),
        mode,
        empirical: count as f64 / s.eligible as f64,
        theoretical: theoretical_density(c)?,
        partial_sums: (0..PARTIAL_SUM_TERMS)
            .map(|k| partial_alternating_sum(c, k))
            .collect(),
    })
}
