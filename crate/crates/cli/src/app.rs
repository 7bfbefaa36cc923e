//! Argument parsing, validation, and dispatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use primegap::counting::{enumerate_m, inclusion_exclusion_n, make_params};
use primegap::gaps::{scan_range_with, ScanConfig, ScanOptions, ThresholdMode};
use primegap::sieve::{build_prime_table, isqrt, DEFAULT_SEGMENT_SIZE};
use primegap::Error;
use serde::Serialize;

use crate::report::{wide_csv, wide_rows, CountReport, DensityTable, ScanReport};
use crate::verify::{run_verify, VerifyConfig, DEFAULT_MAX_X, DEFAULT_SAMPLES, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

/// Largest prime table the front end will build.
pub const TABLE_CAPACITY: u64 = 100_000_000;
/// `count` refuses larger `x` without `--allow-large`.
pub const COUNT_GUARD: u64 = 10_000_000;
/// Hard ceiling for `count --allow-large`.
pub const COUNT_CAPACITY: u64 = 1_000_000_000_000;
/// Upper limit on the oracle grid of `verify`.
pub const VERIFY_CAPACITY: u64 = 100_000;

#[derive(Debug, Parser)]
#[command(name = "primegap", version, about = "Gaps between consecutive prime factors: scans, densities, and exact counts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Histogram and exceedance counts of f(n) over [min, max).
    Scan(RangeArgs),
    /// Empirical exceedance density against 1 - e^(-1/c), one row per c.
    Density(RangeArgs),
    /// Direct and inclusion-exclusion counts of N(x) with the per-layer breakdown.
    Count(CountArgs),
    /// Lists the wide squarefree set ordered by (k, m).
    EnumerateM(EnumerateArgs),
    /// Checks the fast paths against the reference implementations.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Threshold c ln ln n for each n.
    N,
    /// Threshold c ln ln x with x = max - 1.
    Range,
}

impl From<Mode> for ThresholdMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::N => ThresholdMode::PerN,
            Mode::Range => ThresholdMode::PerRange,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    /// First integer scanned (at least 16).
    #[arg(long)]
    pub min: u64,
    /// One past the last integer scanned.
    #[arg(long)]
    pub max: u64,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',', required = true)]
    pub c: Vec<f64>,
    #[arg(long, value_enum, default_value = "n")]
    pub mode: Mode,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_SIZE)]
    pub segment_size: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub c: f64,
    /// Lift the x <= 10^7 guard.
    #[arg(long)]
    pub allow_large: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub x: u64,
    #[arg(long)]
    pub c: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest x of the counting grid.
    #[arg(long, default_value_t = DEFAULT_MAX_X)]
    pub max_x: u64,
    /// Random n checked against the reference factorization.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Negative control: flips one boundary comparison.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure with its exit status and a one-line reason.
#[derive(Debug)]
pub struct Failure {
    pub status: i32,
    pub reason: String,
}

impl Failure {
    fn usage(reason: impl Into<String>) -> Self {
        Failure {
            status: EXIT_USAGE,
            reason: reason.into(),
        }
    }

    fn capacity(reason: impl Into<String>) -> Self {
        Failure {
            status: EXIT_CAPACITY,
            reason: reason.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InsufficientTable { .. } => Failure::capacity(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

/// Parses `args`, runs the command, and returns the exit status.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("{line}");
            return EXIT_USAGE;
        }
    };
    match execute(&cli.command) {
        Ok(status) => status,
        Err(f) => {
            eprintln!("error: {}", f.reason);
            f.status
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os())
}

fn execute(command: &Command) -> Result<i32, Failure> {
    match command {
        Command::Scan(args) => {
            let summary = range_scan(args)?;
            let report = ScanReport::new(&summary);
            emit(&args.output, Format::Json, &report, || report.to_csv())?;
        }
        Command::Density(args) => {
            let summary = range_scan(args)?;
            let table = DensityTable::new(&summary, args.mode.into())?;
            emit(&args.output, Format::Json, &table, || table.to_csv())?;
        }
        Command::Count(args) => {
            if args.x > COUNT_GUARD && !args.allow_large {
                return Err(Failure::capacity(format!(
                    "count with x = {} exceeds {COUNT_GUARD}; pass --allow-large to proceed",
                    args.x
                )));
            }
            if args.x > COUNT_CAPACITY {
                return Err(Failure::capacity(format!("count supports x <= {COUNT_CAPACITY}")));
            }
            let params = make_params(args.x, args.c)?;
            // a table reaching x lets large layers take the sieving path
            let limit = args.x.min(TABLE_CAPACITY).max(isqrt(args.x)).max(params.y_floor()).max(2);
            let table = build_prime_table(limit)?;
            let breakdown = inclusion_exclusion_n(&params, &table)?;
            let report = CountReport::new(&breakdown, &table)?;
            emit(&args.output, Format::Json, &report, || report.to_csv())?;
        }
        Command::EnumerateM(args) => {
            if args.x > COUNT_GUARD {
                return Err(Failure::capacity(format!("enumerate-m supports x <= {COUNT_GUARD}")));
            }
            let params = make_params(args.x, args.c)?;
            let table = build_prime_table(params.y_floor().max(2))?;
            let rows = wide_rows(&enumerate_m(&params, &table)?);
            emit(&args.output, Format::Csv, &rows, || wide_csv(&rows))?;
        }
        Command::Verify(args) => {
            if args.max_x > VERIFY_CAPACITY {
                return Err(Failure::capacity(format!("verify grid supports max-x <= {VERIFY_CAPACITY}")));
            }
            if args.workers == 0 {
                return Err(Failure::usage("--workers must be positive"));
            }
            let config = VerifyConfig {
                max_x: args.max_x,
                samples: args.samples,
                seed: args.seed,
                workers: args.workers,
                inject_fault: args.inject_fault,
            };
            let report = run_verify(&config)?;
            write_output(args.out.as_ref(), &report.render())?;
            return Ok(if report.all_passed() { EXIT_OK } else { EXIT_VERIFY });
        }
    }
    Ok(EXIT_OK)
}

fn range_scan(args: &RangeArgs) -> Result<primegap::gaps::ScanSummary, Failure> {
    if args.min < 16 || args.min >= args.max {
        return Err(Failure::usage(format!(
            "need 16 <= --min < --max, got --min {} --max {}",
            args.min, args.max
        )));
    }
    if args.workers == 0 || args.segment_size == 0 {
        return Err(Failure::usage("--workers and --segment-size must be positive"));
    }
    let needed = isqrt(args.max - 1);
    if needed > TABLE_CAPACITY {
        return Err(Failure::capacity(format!(
            "--max {} needs primes up to {needed}, beyond the table capacity {TABLE_CAPACITY}",
            args.max
        )));
    }
    let config = ScanConfig::new(&args.c)?.with_range_reference(args.max - 1)?;
    let table = build_prime_table(needed.max(2))?;
    let options = ScanOptions {
        workers: args.workers,
        segment_size: args.segment_size,
    };
    Ok(scan_range_with(args.min, args.max, &config, &table, options)?)
}

fn emit<T: Serialize>(
    output: &OutputArgs,
    default: Format,
    value: &T,
    csv: impl FnOnce() -> String,
) -> Result<(), Failure> {
    let text = match output.format.unwrap_or(default) {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::usage(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => csv(),
    };
    write_output(output.out.as_ref(), &text)
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    let result = match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| Failure {
        status: EXIT_USAGE,
        reason: format!("cannot write output: {e}"),
    })
}
