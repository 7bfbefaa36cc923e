//! Exact inclusion-exclusion count of integers without a large prime gap.
//!
//! With `Z = c ln ln x` and `y = min(x^(1/Z), x)`, `chi_p(n)` says that `p`
//! divides `n` but no prime of `(p, p^Z]` does. `N(x)` counts `n <= x` with
//! `chi_p(n) = 0` for every prime `p <= y` dividing `n`. Expanding the
//! product of `(1 - chi_p)` only leaves squarefree `m` whose consecutive
//! primes are more than a `Z`-th power apart (the wide set), so
//!
//! ```text
//! N(x) = sum_{m wide} mu(m) #{n <= x : chi_m(n) = 1}
//! ```
//!
//! and the inner count is `#{v <= x/m : v has no prime in any (p, p^Z], p | m}`.
//! Real endpoints `p^Z` are reduced once to integers through [`Boundary`], so
//! every later test is an integer comparison.

use std::cmp::Ordering;

use crate::boundary::{Boundary, BoundaryPolicy, BoundaryStats};
use crate::error::{invalid, Error, Result};
use crate::sieve::{isqrt, Factorization, PrimeTable, SegmentScanner};

/// Above this many cofactors `count_chi_m` sieves instead of factorizing.
pub const SIEVE_PATH_THRESHOLD: u64 = 100_000;

#[derive(Debug, Clone)]
pub struct CountParams {
    x: u64,
    c: f64,
    z: f64,
    y: f64,
    y_floor: u64,
    boundary: Boundary,
}

pub fn make_params(x: u64, c: f64) -> Result<CountParams> {
    make_params_with(x, c, BoundaryPolicy::Standard)
}

pub fn make_params_with(x: u64, c: f64, policy: BoundaryPolicy) -> Result<CountParams> {
    if x < 16 {
        return invalid(format!("x must be >= 16, got {x}"));
    }
    if !(c.is_finite() && c > 0.0) {
        return invalid(format!("c must be finite and > 0, got {c}"));
    }
    let boundary = Boundary::new(x, c, policy);
    let z = boundary.z();
    let ln_x = (x as f64).ln();
    let y = if z <= 1.0 { x as f64 } else { (ln_x / z).exp().min(x as f64) };
    let y_floor = boundary.floor_root();
    Ok(CountParams {
        x,
        c,
        z,
        y,
        y_floor,
        boundary,
    })
}

impl CountParams {
    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `c ln ln x`.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// `min(x^(1/Z), x)`.
    pub fn y(&self) -> f64 {
        self.y
    }

    /// Largest integer not exceeding `y`, decided exactly.
    pub fn y_floor(&self) -> u64 {
        self.y_floor
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    /// Rebuilds the parameters with one comparison inverted; the verifier's
    /// negative control. Affects `y_floor` when `(a, b)` is hit by its search.
    pub fn with_injected_flip(&self, a: u64, b: u64) -> CountParams {
        let mut boundary = Boundary::new(self.x, self.c, self.boundary.policy());
        boundary.inject_flip(a, b);
        let y_floor = boundary.floor_root();
        CountParams {
            boundary,
            y_floor,
            ..self.clone()
        }
    }

    /// Largest integer `<= p^Z`, saturating.
    pub fn pow_floor(&self, p: u64) -> u64 {
        self.boundary.floor_pow(p)
    }

    pub fn is_small_prime(&self, p: u64) -> bool {
        p <= self.y_floor
    }
}

/// `p | n` and no prime factor of `n` lies in `(p, p^Z]`.
pub fn chi_p(fact: &Factorization, p: u64, params: &CountParams) -> bool {
    if !fact.divisible_by(p) {
        return false;
    }
    let last = params.pow_floor(p);
    !fact.primes().any(|q| q > p && q <= last)
}

/// An element of the wide set: squarefree, `P^+(m) <= y`, `m <= x`, and
/// `p_{j+1} > p_j^Z` for consecutive primes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WideSquarefree {
    m: u64,
    primes: Vec<u64>,
}

impl WideSquarefree {
    pub fn one() -> Self {
        WideSquarefree {
            m: 1,
            primes: Vec::new(),
        }
    }

    /// Checks membership for the given primes under `params`.
    pub fn new(primes: Vec<u64>, params: &CountParams) -> Result<Self> {
        let mut m: u64 = 1;
        for (j, &p) in primes.iter().enumerate() {
            if j > 0 && p <= params.pow_floor(primes[j - 1]) {
                return invalid(format!("{p} is not beyond {}^Z", primes[j - 1]));
            }
            if !params.is_small_prime(p) {
                return invalid(format!("{p} exceeds y = {}", params.y()));
            }
            m = match m.checked_mul(p) {
                Some(v) if v <= params.x() => v,
                _ => return invalid(format!("product of {primes:?} exceeds x = {}", params.x())),
            };
        }
        Ok(WideSquarefree { m, primes })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Number of prime factors.
    pub fn k(&self) -> usize {
        self.primes.len()
    }

    pub fn mobius(&self) -> i64 {
        if self.k() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn intervals(&self, params: &CountParams) -> PrimeIntervalSet {
        PrimeIntervalSet {
            intervals: self
                .primes
                .iter()
                .map(|&p| PrimeInterval {
                    prime: p,
                    upper: (params.z() * (p as f64).ln()).exp(),
                    last: params.pow_floor(p),
                })
                .collect(),
        }
    }
}

/// `(prime, prime^Z]`, with `last` the largest integer inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimeInterval {
    pub prime: u64,
    /// Real endpoint `prime^Z`, for reporting only.
    pub upper: f64,
    pub last: u64,
}

/// Stand-in for `P_m`: `gcd(v, P_m) = 1` iff no prime factor of `v` lies in
/// any interval.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrimeIntervalSet {
    intervals: Vec<PrimeInterval>,
}

impl PrimeIntervalSet {
    pub fn intervals(&self) -> &[PrimeInterval] {
        &self.intervals
    }

    pub fn is_disjoint(&self) -> bool {
        self.intervals.windows(2).all(|w| w[0].last < w[1].prime)
    }

    pub fn contains(&self, q: u64) -> bool {
        // intervals are sorted by prime; only the last one starting below q matters
        let i = self.intervals.partition_point(|iv| iv.prime < q);
        i > 0 && q <= self.intervals[i - 1].last
    }

    /// Largest integer in any interval, or 0 when all are empty.
    pub fn max_last(&self) -> u64 {
        self.intervals
            .iter()
            .filter(|iv| iv.last > iv.prime)
            .map(|iv| iv.last)
            .max()
            .unwrap_or(0)
    }

    /// Primes in the union of the intervals, clipped to `cap`.
    fn primes<'t>(&'t self, table: &'t PrimeTable, cap: u64) -> impl Iterator<Item = Result<&'t [u64]>> + 't {
        self.intervals
            .iter()
            .map(move |iv| table.primes_between(iv.prime, iv.last.min(cap)))
    }
}

/// `chi_m(n) = prod_{p | m} chi_p(n)`; true for `m = 1`.
pub fn chi_m(fact: &Factorization, m: &WideSquarefree, params: &CountParams) -> bool {
    m.primes().iter().all(|&p| chi_p(fact, p, params))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectCounts {
    /// `n <= x` with `chi_p(n) = 0` for every prime `p <= y` dividing `n`.
    pub n_direct: u64,
    /// `n <= x` with `p_{j+1}(n) <= p_j(n)^Z` for all `j`.
    pub n_direct_gapform: u64,
    /// `n >= 2` of gap form with `P^+(n) <= y`.
    pub smooth_gap_count: u64,
}

/// Interval ends for small primes, computed once.
struct PowFloors<'p> {
    params: &'p CountParams,
    dense: Vec<u64>,
}

impl<'p> PowFloors<'p> {
    fn new(params: &'p CountParams, table: &PrimeTable, up_to: u64) -> Self {
        let up_to = up_to.min(table.limit());
        let mut dense = vec![0; up_to as usize + 1];
        for &p in table.primes().iter().take_while(|&&p| p <= up_to) {
            dense[p as usize] = params.pow_floor(p);
        }
        PowFloors { params, dense }
    }

    fn get(&self, p: u64) -> u64 {
        match self.dense.get(p as usize) {
            Some(&v) if v > 0 => v,
            _ => self.params.pow_floor(p),
        }
    }
}

/// Streams the factorizations of `1..=x` and applies both predicates.
pub fn count_n_direct(params: &CountParams, table: &PrimeTable) -> Result<DirectCounts> {
    let x = params.x();
    let scanner = SegmentScanner::new(1, x + 1, table)?;
    // a prime with a larger prime factor after it is below sqrt(x)
    let floors = PowFloors::new(params, table, isqrt(x));
    let mut counts = DirectCounts {
        n_direct: 0,
        n_direct_gapform: 0,
        smooth_gap_count: 0,
    };
    scanner.for_each(|fact| {
        let primes = fact.factors();
        let direct = primes.iter().enumerate().all(|(j, pp)| {
            let p = pp.prime;
            if !params.is_small_prime(p) {
                return true;
            }
            // chi_p(n) = 0: some later prime factor within (p, p^Z]
            primes[j + 1..].iter().any(|q| q.prime <= floors.get(p))
        });
        let gapform = primes.windows(2).all(|w| w[1].prime <= floors.get(w[0].prime));
        counts.n_direct += direct as u64;
        counts.n_direct_gapform += gapform as u64;
        if gapform && fact.n() >= 2 && params.is_small_prime(fact.largest_prime()) {
            counts.smooth_gap_count += 1;
        }
    });
    Ok(counts)
}

/// All of the wide set, ordered by `(k, m)`.
pub fn enumerate_m(params: &CountParams, table: &PrimeTable) -> Result<Vec<WideSquarefree>> {
    let y = params.y_floor();
    if table.limit() < y {
        return Err(Error::InsufficientTable {
            needed: y,
            limit: table.limit(),
        });
    }
    let small = table.primes_between(1, y)?;
    let mut out = vec![WideSquarefree::one()];
    let mut stack: Vec<u64> = Vec::new();
    extend_wide(params, small, 1, 0, &mut stack, &mut |primes, m| {
        out.push(WideSquarefree {
            m,
            primes: primes.to_vec(),
        });
    });
    out.sort_by(|a, b| a.k().cmp(&b.k()).then(a.m.cmp(&b.m)));
    Ok(out)
}

/// Depth-first extension of `stack` (product `m`) by primes of `small`
/// starting at index `from`.
fn extend_wide<F: FnMut(&[u64], u64)>(
    params: &CountParams,
    small: &[u64],
    m: u64,
    from: usize,
    stack: &mut Vec<u64>,
    emit: &mut F,
) {
    let x = params.x();
    for (i, &q) in small.iter().enumerate().skip(from) {
        let Some(mq) = m.checked_mul(q).filter(|&v| v <= x) else {
            break;
        };
        stack.push(q);
        emit(stack, mq);
        let floor = params.pow_floor(q);
        let next = small.partition_point(|&r| r <= floor).max(i + 1);
        extend_wide(params, small, mq, next, stack, emit);
        stack.pop();
    }
}

/// `#{n <= x : chi_m(n) = 1}`, by sieving when `x/m` is large and the table
/// reaches the interval primes, else by factorizing each cofactor.
pub fn count_chi_m(m: &WideSquarefree, params: &CountParams, table: &PrimeTable) -> Result<u64> {
    let bound = params.x() / m.m();
    let intervals = m.intervals(params);
    if bound > SIEVE_PATH_THRESHOLD && table.limit() >= intervals.max_last().min(bound) {
        count_chi_m_sieved(m, params, table)
    } else {
        count_chi_m_streaming(m, params, table)
    }
}

/// Factorizes every `v <= x/m` and rejects those with a prime in an interval.
pub fn count_chi_m_streaming(m: &WideSquarefree, params: &CountParams, table: &PrimeTable) -> Result<u64> {
    let bound = params.x() / m.m();
    let intervals = m.intervals(params);
    let mut count = 0;
    SegmentScanner::new(1, bound + 1, table)?.for_each(|fact| {
        if !fact.primes().any(|q| intervals.contains(q)) {
            count += 1;
        }
    });
    Ok(count)
}

/// Marks multiples of every interval prime up to `x/m` and counts the rest.
pub fn count_chi_m_sieved(m: &WideSquarefree, params: &CountParams, table: &PrimeTable) -> Result<u64> {
    let bound = params.x() / m.m();
    let intervals = m.intervals(params);
    let mut marked = vec![false; bound as usize + 1];
    for primes in intervals.primes(table, bound) {
        for &q in primes? {
            let mut v = q;
            while v <= bound {
                marked[v as usize] = true;
                v += q;
            }
        }
    }
    Ok(marked[1..].iter().filter(|&&hit| !hit).count() as u64)
}

/// One inclusion-exclusion layer: the `m` with `k` prime factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layer {
    pub k: usize,
    pub m_count: u64,
    pub n_k: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BonferroniPartial {
    pub truncation: usize,
    pub partial: i64,
}

#[derive(Debug, Clone)]
pub struct CountBreakdown {
    pub params: CountParams,
    pub direct: DirectCounts,
    pub layers: Vec<Layer>,
    pub n_inclusion_exclusion: i64,
    pub bonferroni: Vec<BonferroniPartial>,
    pub boundary: BoundaryStats,
}

impl CountBreakdown {
    pub fn k_max(&self) -> usize {
        self.layers.last().map_or(0, |l| l.k)
    }

    /// Inclusion-exclusion total matches the direct count.
    pub fn identity_holds(&self) -> bool {
        self.n_inclusion_exclusion == self.direct.n_direct as i64
    }

    /// Truncations violating the even-upper / odd-lower pattern, plus the
    /// final truncation if it is not exact.
    pub fn bonferroni_violations(&self) -> Vec<BonferroniPartial> {
        let n = self.direct.n_direct as i64;
        let k_max = self.k_max();
        self.bonferroni
            .iter()
            .copied()
            .filter(|b| {
                let ok = if b.truncation % 2 == 0 { b.partial >= n } else { b.partial <= n };
                !ok || (b.truncation == k_max && b.partial != n)
            })
            .collect()
    }
}

/// Evaluates every layer `N_k` and assembles the full breakdown.
pub fn inclusion_exclusion_n(params: &CountParams, table: &PrimeTable) -> Result<CountBreakdown> {
    let direct = count_n_direct(params, table)?;
    let wide = enumerate_m(params, table)?;
    let mut layers: Vec<Layer> = Vec::new();
    for m in &wide {
        let count = count_chi_m(m, params, table)?;
        match layers.last_mut() {
            Some(layer) if layer.k == m.k() => {
                layer.m_count += 1;
                layer.n_k += count;
            }
            _ => layers.push(Layer {
                k: m.k(),
                m_count: 1,
                n_k: count,
            }),
        }
    }
    let mut partial = 0i64;
    let bonferroni: Vec<BonferroniPartial> = layers
        .iter()
        .map(|layer| {
            let sign = if layer.k % 2 == 0 { 1 } else { -1 };
            partial += sign * layer.n_k as i64;
            BonferroniPartial {
                truncation: layer.k,
                partial,
            }
        })
        .collect();
    Ok(CountBreakdown {
        params: params.clone(),
        direct,
        n_inclusion_exclusion: partial,
        layers,
        bonferroni,
        boundary: params.boundary().stats(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoprimeDensity {
    /// `phi(P_m) / P_m`, the product of `1 - 1/q` over interval primes.
    pub product: f64,
    /// `Z^(-k)`.
    pub mertens_prediction: f64,
}

pub fn coprime_density(m: &WideSquarefree, params: &CountParams, table: &PrimeTable) -> Result<CoprimeDensity> {
    let intervals = m.intervals(params);
    let mut product = 1.0;
    for primes in intervals.primes(table, u64::MAX) {
        for &q in primes? {
            product *= 1.0 - 1.0 / q as f64;
        }
    }
    Ok(CoprimeDensity {
        product,
        mertens_prediction: params.z().powi(-(m.k() as i32)),
    })
}

/// `sum 1/(p_1 ... p_k)` over increasing prime tuples with `p_k <= y` and
/// `p_{j+1} > p_j^Z`; with `constrain_m_le_x` also `p_1 ... p_k <= x`.
pub fn mertens_tuple_sum(
    params: &CountParams,
    k: usize,
    constrain_m_le_x: bool,
    table: &PrimeTable,
) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    let y = params.y_floor();
    if table.limit() < y {
        return Err(Error::InsufficientTable {
            needed: y,
            limit: table.limit(),
        });
    }
    let small = table.primes_between(1, y)?;
    if constrain_m_le_x {
        let mut sum = 0.0;
        let mut stack = Vec::new();
        extend_wide(params, small, 1, 0, &mut stack, &mut |primes, m| {
            if primes.len() == k {
                sum += 1.0 / m as f64;
            }
        });
        return Ok(sum);
    }
    // layer[i]: sum over admissible tuples of the current length ending at small[i]
    let mut layer: Vec<f64> = small.iter().map(|&p| 1.0 / p as f64).collect();
    let floors: Vec<u64> = small.iter().map(|&p| params.pow_floor(p)).collect();
    for _ in 1..k {
        let mut next = vec![0.0; small.len()];
        // floors is nondecreasing, so predecessors of q form a prefix
        let mut prefix = 0.0;
        let mut i = 0;
        for (j, &q) in small.iter().enumerate() {
            while i < j && floors[i].cmp(&q) == Ordering::Less {
                prefix += layer[i];
                i += 1;
            }
            next[j] = prefix / q as f64;
        }
        layer = next;
    }
    Ok(layer.iter().sum())
}
