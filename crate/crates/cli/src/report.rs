//! Serializable views of scans, density tables, count breakdowns, and the
//! wide set, with JSON and CSV renderings.

use std::fmt::Write as _;

use primegap::counting::{mertens_tuple_sum, CountBreakdown, WideSquarefree};
use primegap::gaps::{empirical_density, Histogram, ScanSummary, ThresholdMode, HISTOGRAM_BINS};
use primegap::sieve::PrimeTable;
use primegap::Result;
use serde::Serialize;

use crate::format::{real, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    N,
    Range,
}

impl From<ThresholdMode> for ModeName {
    fn from(m: ThresholdMode) -> Self {
        match m {
            ThresholdMode::PerN => ModeName::N,
            ThresholdMode::PerRange => ModeName::Range,
        }
    }
}

impl ModeName {
    fn as_str(self) -> &'static str {
        match self {
            ModeName::N => "n",
            ModeName::Range => "range",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct HistogramReport {
    pub min: Real,
    pub max: Real,
    pub bin_width: Real,
    pub edges: Vec<Real>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

#[derive(Debug, Serialize)]
pub struct ExceedReport {
    pub c: Real,
    pub per_n: u64,
    pub per_range: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct ScanReport {
    pub range: Vec<[u64; 2]>,
    pub total: u64,
    pub eligible: u64,
    pub excluded: u64,
    pub range_reference_x: Option<u64>,
    pub histogram: HistogramReport,
    pub exceed: Vec<ExceedReport>,
    pub mean_f: Option<Real>,
    pub var_f: Option<Real>,
}

impl ScanReport {
    pub fn new(s: &ScanSummary) -> Self {
        let h = s.histogram();
        let per_range = s.exceed_range();
        ScanReport {
            range: s.ranges().iter().map(|&(a, b)| [a, b]).collect(),
            total: s.total(),
            eligible: s.eligible(),
            excluded: s.total() - s.eligible(),
            range_reference_x: s.config().range_x(),
            histogram: HistogramReport {
                min: Real(Histogram::edge(0)),
                max: Real(Histogram::edge(HISTOGRAM_BINS)),
                bin_width: Real(primegap::gaps::HISTOGRAM_BIN_WIDTH),
                edges: (0..=HISTOGRAM_BINS).map(|i| Real(Histogram::edge(i))).collect(),
                counts: h.bins.clone(),
                underflow: h.underflow,
                overflow: h.overflow,
            },
            exceed: s
                .config()
                .thresholds()
                .iter()
                .enumerate()
                .map(|(i, &c)| ExceedReport {
                    c: Real(c),
                    per_n: s.exceed()[i],
                    per_range: per_range.get(i).copied(),
                })
                .collect(),
            mean_f: s.mean_f().map(Real),
            var_f: s.var_f().map(Real),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let ranges: Vec<String> = self.range.iter().map(|[a, b]| format!("[{a};{b})")).collect();
        let _ = writeln!(out, "# range,{}", ranges.join(" "));
        let _ = writeln!(out, "# total,{}", self.total);
        let _ = writeln!(out, "# eligible,{}", self.eligible);
        let _ = writeln!(out, "# excluded,{}", self.excluded);
        if let Some(x) = self.range_reference_x {
            let _ = writeln!(out, "# range_reference_x,{x}");
        }
        let _ = writeln!(out, "# mean_f,{}", opt_real(self.mean_f));
        let _ = writeln!(out, "# var_f,{}", opt_real(self.var_f));
        let _ = writeln!(out, "# underflow,{}", self.histogram.underflow);
        let _ = writeln!(out, "# overflow,{}", self.histogram.overflow);
        for e in &self.exceed {
            let per_range = e.per_range.map_or(String::new(), |v| v.to_string());
            let _ = writeln!(out, "# exceed,c={},per_n={},per_range={}", real(e.c.0), e.per_n, per_range);
        }
        out.push_str("bin_lo,bin_hi,count\n");
        for (i, count) in self.histogram.counts.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{}",
                real(self.histogram.edges[i].0),
                real(self.histogram.edges[i + 1].0),
                count
            );
        }
        out
    }
}

fn opt_real(v: Option<Real>) -> String {
    v.map_or(String::new(), |r| real(r.0))
}

#[derive(Debug, Serialize)]
pub struct DensityRow {
    pub c: Real,
    pub empirical: Real,
    pub empirical_per_n: Real,
    pub empirical_per_range: Option<Real>,
    pub theoretical: Real,
    pub deviation: Real,
    pub partial_sums: Vec<Real>,
}

#[derive(Debug, Serialize)]
pub struct DensityTable {
    pub x: u64,
    pub mode: ModeName,
    pub eligible: u64,
    pub rows: Vec<DensityRow>,
}

impl DensityTable {
    /// Rows in increasing `c`; `empirical` follows `mode`.
    pub fn new(s: &ScanSummary, mode: ThresholdMode) -> Result<Self> {
        let mut rows = Vec::new();
        for &c in s.config().thresholds() {
            let per_n = empirical_density(s, c, ThresholdMode::PerN)?;
            let per_range = s
                .config()
                .range_x()
                .map(|_| empirical_density(s, c, ThresholdMode::PerRange))
                .transpose()?;
            let chosen = match mode {
                ThresholdMode::PerN => &per_n,
                ThresholdMode::PerRange => per_range.as_ref().unwrap_or(&per_n),
            };
            rows.push(DensityRow {
                c: Real(c),
                empirical: Real(chosen.empirical),
                empirical_per_n: Real(per_n.empirical),
                empirical_per_range: per_range.as_ref().map(|r| Real(r.empirical)),
                theoretical: Real(chosen.theoretical),
                deviation: Real(chosen.deviation()),
                partial_sums: chosen.partial_sums.iter().copied().map(Real).collect(),
            });
        }
        Ok(DensityTable {
            x: s.last_n().unwrap_or(0),
            mode: mode.into(),
            eligible: s.eligible(),
            rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# x,{}", self.x);
        let _ = writeln!(out, "# mode,{}", self.mode.as_str());
        let _ = writeln!(out, "# eligible,{}", self.eligible);
        let terms = self.rows.first().map_or(0, |r| r.partial_sums.len());
        out.push_str("c,empirical,empirical_per_n,empirical_per_range,theoretical,deviation");
        for k in 0..terms {
            let _ = write!(out, ",partial_sum_{k}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                real(r.c.0),
                real(r.empirical.0),
                real(r.empirical_per_n.0),
                opt_real(r.empirical_per_range),
                real(r.theoretical.0),
                real(r.deviation.0)
            );
            for p in &r.partial_sums {
                let _ = write!(out, ",{}", real(p.0));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct ParamsReport {
    pub x: u64,
    pub c: Real,
    pub z: Real,
    pub y: Real,
    pub y_floor: u64,
}

#[derive(Debug, Serialize)]
pub struct LayerReport {
    pub k: usize,
    pub m_count: u64,
    #[serde(rename = "N_k")]
    pub n_k: u64,
    /// `x / (c^k k!)`.
    pub reference: Real,
    pub tuple_sum: Real,
    pub tuple_sum_unconstrained: Real,
    /// `(ln ln x)^k / k!`.
    pub lnln_power: Real,
}

#[derive(Debug, Serialize)]
pub struct BonferroniReport {
    #[serde(rename = "K")]
    pub truncation: usize,
    pub partial: i64,
    pub bound: &'static str,
    pub holds: bool,
}

#[derive(Debug, Serialize)]
pub struct BoundaryReport {
    pub extended: u64,
    pub corrected: u64,
}

#[derive(Debug, Serialize)]
pub struct CountReport {
    pub params: ParamsReport,
    #[serde(rename = "N_direct")]
    pub n_direct: u64,
    #[serde(rename = "N_direct_gapform")]
    pub n_direct_gapform: u64,
    pub smooth_gap_count: u64,
    pub per_k: Vec<LayerReport>,
    pub bonferroni: Vec<BonferroniReport>,
    #[serde(rename = "N_inclusion_exclusion")]
    pub n_inclusion_exclusion: i64,
    pub identity: &'static str,
    pub boundary: BoundaryReport,
}

impl CountReport {
    pub fn new(b: &CountBreakdown, table: &PrimeTable) -> Result<Self> {
        let p = &b.params;
        let x = p.x() as f64;
        let lnln = x.ln().ln();
        let mut per_k = Vec::with_capacity(b.layers.len());
        for layer in &b.layers {
            let k = layer.k;
            let k_fact: f64 = (1..=k).map(|i| i as f64).product();
            per_k.push(LayerReport {
                k,
                m_count: layer.m_count,
                n_k: layer.n_k,
                reference: Real(x / (p.c().powi(k as i32) * k_fact)),
                tuple_sum: Real(mertens_tuple_sum(p, k, true, table)?),
                tuple_sum_unconstrained: Real(mertens_tuple_sum(p, k, false, table)?),
                lnln_power: Real(lnln.powi(k as i32) / k_fact),
            });
        }
        let n = b.direct.n_direct as i64;
        let k_max = b.k_max();
        let bonferroni = b
            .bonferroni
            .iter()
            .map(|bp| {
                let (bound, holds) = if bp.truncation == k_max {
                    ("exact", bp.partial == n)
                } else if bp.truncation % 2 == 0 {
                    ("upper", bp.partial >= n)
                } else {
                    ("lower", bp.partial <= n)
                };
                BonferroniReport {
                    truncation: bp.truncation,
                    partial: bp.partial,
                    bound,
                    holds,
                }
            })
            .collect();
        Ok(CountReport {
            params: ParamsReport {
                x: p.x(),
                c: Real(p.c()),
                z: Real(p.z()),
                y: Real(p.y()),
                y_floor: p.y_floor(),
            },
            n_direct: b.direct.n_direct,
            n_direct_gapform: b.direct.n_direct_gapform,
            smooth_gap_count: b.direct.smooth_gap_count,
            per_k,
            bonferroni,
            n_inclusion_exclusion: b.n_inclusion_exclusion,
            identity: if b.identity_holds() { "PASS" } else { "FAIL" },
            boundary: BoundaryReport {
                extended: b.boundary.extended,
                corrected: b.boundary.corrected,
            },
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        let _ = writeln!(out, "# x,{}", p.x);
        let _ = writeln!(out, "# c,{}", real(p.c.0));
        let _ = writeln!(out, "# z,{}", real(p.z.0));
        let _ = writeln!(out, "# y,{}", real(p.y.0));
        let _ = writeln!(out, "# y_floor,{}", p.y_floor);
        let _ = writeln!(out, "# N_direct,{}", self.n_direct);
        let _ = writeln!(out, "# N_direct_gapform,{}", self.n_direct_gapform);
        let _ = writeln!(out, "# smooth_gap_count,{}", self.smooth_gap_count);
        let _ = writeln!(out, "# N_inclusion_exclusion,{}", self.n_inclusion_exclusion);
        let _ = writeln!(out, "# identity,{}", self.identity);
        out.push_str("k,m_count,N_k,reference,tuple_sum,tuple_sum_unconstrained,lnln_power,bonferroni_partial,bound\n");
        for (layer, bp) in self.per_k.iter().zip(&self.bonferroni) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                layer.k,
                layer.m_count,
                layer.n_k,
                real(layer.reference.0),
                real(layer.tuple_sum.0),
                real(layer.tuple_sum_unconstrained.0),
                real(layer.lnln_power.0),
                bp.partial,
                bp.bound
            );
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct WideRow {
    pub k: usize,
    pub m: u64,
    pub primes: Vec<u64>,
}

pub fn wide_rows(wide: &[WideSquarefree]) -> Vec<WideRow> {
    wide.iter()
        .map(|w| WideRow {
            k: w.k(),
            m: w.m(),
            primes: w.primes().to_vec(),
        })
        .collect()
}

/// `k,m,primes` with primes space-separated and `-` for `m = 1`.
pub fn wide_csv(rows: &[WideRow]) -> String {
    let mut out = String::from("k,m,primes\n");
    for r in rows {
        let primes = if r.primes.is_empty() {
            "-".to_string()
        } else {
            r.primes.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
        };
        let _ = writeln!(out, "{},{},{}", r.k, r.m, primes);
    }
    out
}
