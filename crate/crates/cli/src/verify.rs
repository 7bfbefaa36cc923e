//! Self-verification: the counting grid and gap statistics against the
//! slow reference implementations.

use std::fmt::Write as _;

use primegap::counting::{enumerate_m, inclusion_exclusion_n, make_params, make_params_with};
use primegap::gaps::{
    gap_profile, merge_summaries, partial_alternating_sum, scan_range, scan_range_with, ScanConfig, ScanOptions,
};
use primegap::oracle::{naive_f, naive_factorize, naive_n, naive_wide_set};
use primegap::sieve::{build_prime_table, factorize};
use primegap::boundary::BoundaryPolicy;
use primegap::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GRID_X: [u64; 5] = [30, 100, 300, 1000, 2000];
pub const GRID_C: [f64; 3] = [0.5, 1.0, 2.0];
pub const DEFAULT_MAX_X: u64 = 2000;
pub const DEFAULT_SAMPLES: usize = 2000;
pub const DEFAULT_SEED: u64 = 20_241_015;
const SAMPLE_LIMIT: u64 = 1_000_000;
const MERGE_RANGE: (u64, u64) = (16, 20_000);
const F_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub max_x: u64,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    /// Flip the `y` cutoff comparison at the first grid point where `y < x`.
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_x: DEFAULT_MAX_X,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            workers: 1,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The compared values, shown on failure.
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, name: impl Into<String>, left: T, right: T) {
        let detail = format!("{left:?} vs {right:?}");
        self.push(name, left == right, detail);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            if c.passed {
                let _ = writeln!(out, "PASS {}", c.name);
            } else {
                let _ = writeln!(out, "FAIL {}: {}", c.name, c.detail);
            }
        }
        let _ = writeln!(
            out,
            "{} checks, {} failed",
            self.checks.len(),
            self.failures()
        );
        out
    }
}

pub fn run_verify(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    counting_grid(config, &mut report)?;
    gap_samples(config, &mut report)?;
    scan_laws(config, &mut report)?;
    partial_sums(&mut report);
    Ok(report)
}

fn counting_grid(config: &VerifyConfig, report: &mut VerifyReport) -> Result<()> {
    let xs: Vec<u64> = GRID_X.iter().copied().filter(|&x| x <= config.max_x).collect();
    let table = build_prime_table(xs.iter().copied().max().unwrap_or(2))?;
    let mut fault_pending = config.inject_fault;
    for &x in &xs {
        for &c in &GRID_C {
            let tag = format!("(x={x}, c={c})");
            let mut params = make_params(x, c)?;
            if fault_pending && params.y_floor() < x {
                params = params.with_injected_flip(x, params.y_floor() + 1);
                fault_pending = false;
            }
            let b = inclusion_exclusion_n(&params, &table)?;
            let n = b.direct.n_direct;
            let naive = naive_n(x, c);
            report.push(
                format!("{tag} N_direct = {n} = N_IE"),
                b.identity_holds(),
                format!("N_direct {n} vs N_IE {}", b.n_inclusion_exclusion),
            );
            report.eq(format!("{tag} N_direct = naive_N"), n, naive);
            let violations = b.bonferroni_violations();
            report.push(
                format!("{tag} Bonferroni bounds"),
                violations.is_empty(),
                format!("N {n} vs violating partials {violations:?}"),
            );
            report.eq(
                format!("{tag} gap-form count = N_direct + smooth count"),
                b.direct.n_direct_gapform,
                n + b.direct.smooth_gap_count,
            );
            let wide: Vec<Vec<u64>> = enumerate_m(&params, &table)?.iter().map(|w| w.primes().to_vec()).collect();
            report.eq(format!("{tag} wide set = brute force"), wide, naive_wide_set(x, c));
            let double = make_params_with(x, c, BoundaryPolicy::DoubleOnly)?;
            let reference = inclusion_exclusion_n(&double, &table)?;
            report.eq(
                format!("{tag} extended-precision fallback agrees with double"),
                (b.direct, b.n_inclusion_exclusion),
                (reference.direct, reference.n_inclusion_exclusion),
            );
        }
    }
    Ok(())
}

fn gap_samples(config: &VerifyConfig, report: &mut VerifyReport) -> Result<()> {
    let table = build_prime_table(1000)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut factor_mismatch = None;
    let mut f_mismatch = None;
    for _ in 0..config.samples {
        let n = rng.gen_range(1..=SAMPLE_LIMIT);
        let fact = factorize(n, &table)?;
        if factor_mismatch.is_none() && fact != naive_factorize(n) {
            factor_mismatch = Some(n);
        }
        let fast = gap_profile(&fact).f;
        let slow = naive_f(n);
        let agree = match (fast, slow) {
            (Some(a), Some(b)) => (a - b).abs() <= F_TOLERANCE * b.abs(),
            (None, None) => true,
            _ => false,
        };
        if f_mismatch.is_none() && !agree {
            f_mismatch = Some((n, fast, slow));
        }
    }
    let samples = config.samples;
    report.push(
        format!("factorize = naive_factorize on {samples} sampled n <= {SAMPLE_LIMIT}"),
        factor_mismatch.is_none(),
        format!("first mismatch at n = {factor_mismatch:?}"),
    );
    report.push(
        format!("f = naive_f within {F_TOLERANCE:e} relative on {samples} sampled n"),
        f_mismatch.is_none(),
        match f_mismatch {
            Some((n, a, b)) => format!("n = {n}: {a:?} vs {b:?}"),
            None => String::new(),
        },
    );
    Ok(())
}

fn scan_laws(config: &VerifyConfig, report: &mut VerifyReport) -> Result<()> {
    let (a, b) = MERGE_RANGE;
    let table = build_prime_table(1000)?;
    let scan_config = ScanConfig::new(&GRID_C)?.with_range_reference(b - 1)?;
    let whole = scan_range(a, b, &scan_config, &table)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let split = rng.gen_range(a + 1..b);
    let merged = merge_summaries(
        &scan_range(a, split, &scan_config, &table)?,
        &scan_range(split, b, &scan_config, &table)?,
    )?;
    report.push(
        format!("merge of [{a}, {split}) and [{split}, {b}) = direct scan"),
        merged == whole,
        format!("{merged:?} vs {whole:?}"),
    );
    let options = ScanOptions {
        workers: config.workers.max(2),
        segment_size: 997,
    };
    let parallel = scan_range_with(a, b, &scan_config, &table, options)?;
    report.push(
        format!("scan with {} workers = single-threaded scan", options.workers),
        parallel == whole,
        format!("{parallel:?} vs {whole:?}"),
    );
    report.eq(
        "scan total = range length".to_string(),
        whole.total(),
        b - a,
    );
    let monotone = whole.exceed().windows(2).all(|w| w[0] >= w[1]);
    report.push(
        "exceedance counts nonincreasing in c",
        monotone,
        format!("{:?}", whole.exceed()),
    );
    Ok(())
}

fn partial_sums(report: &mut VerifyReport) {
    for c in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let target = (-1.0 / c as f64).exp();
        let mut failure = None;
        for k in 0..10 {
            let lo = partial_alternating_sum(c, k).min(partial_alternating_sum(c, k + 1));
            let hi = partial_alternating_sum(c, k).max(partial_alternating_sum(c, k + 1));
            if !(lo <= target && target <= hi) {
                failure = Some((k, lo, hi));
                break;
            }
        }
        report.push(
            format!("partial sums bracket e^(-1/c) at c={c}"),
            failure.is_none(),
            format!("{failure:?} vs {target:?}"),
        );
    }
}
