//! Prime tables, factorization, and segmented range factorization.
//!
//! The segmented scan sieves each block `[lo, hi)` with every table prime
//! `p <= sqrt(hi - 1)`, recording `p` (and its exponent, by a second pass
//! over multiples of `p^2, p^3, ...`) in a fixed number of slots per integer.
//! Whatever is left once all small primes are divided out is a single prime
//! larger than `sqrt(hi - 1)`, so the table never has to reach `b` itself.

use crate::error::{invalid, Error, Result};

/// Default number of integers sieved per segment.
pub const DEFAULT_SEGMENT_SIZE: usize = 1 << 20;

/// All primes up to an inclusive limit, in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Membership test for `n <= limit`; `None` when the table cannot decide.
    pub fn is_prime(&self, n: u64) -> Option<bool> {
        (n <= self.limit).then(|| self.primes.binary_search(&n).is_ok())
    }

    /// Primes `q` with `lo < q <= hi`, for integer bounds.
    pub fn primes_between(&self, lo_exclusive: u64, hi_inclusive: u64) -> Result<&[u64]> {
        if hi_inclusive > self.limit {
            return Err(Error::InsufficientTable {
                needed: hi_inclusive,
                limit: self.limit,
            });
        }
        if hi_inclusive <= lo_exclusive {
            return Ok(&[]);
        }
        let start = self.primes.partition_point(|&p| p <= lo_exclusive);
        let end = self.primes.partition_point(|&p| p <= hi_inclusive);
        Ok(&self.primes[start..end])
    }

    /// True when trial division by the table fully factors any `n' <= n`.
    pub fn covers(&self, n: u64) -> bool {
        (self.limit as u128) * (self.limit as u128) >= n as u128
    }

    fn require_cover(&self, n: u64) -> Result<()> {
        if self.covers(n) {
            Ok(())
        } else {
            Err(Error::InsufficientTable {
                needed: isqrt(n) + 1,
                limit: self.limit,
            })
        }
    }
}

/// Sieve of Eratosthenes over odd numbers.
pub fn build_prime_table(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return invalid(format!("prime table limit must be >= 2, got {limit}"));
    }
    let Ok(limit_usize) = usize::try_from(limit) else {
        return invalid(format!("prime table limit {limit} exceeds the native word"));
    };
    // composite[i] describes 2i + 1
    let half = limit_usize / 2 + 1;
    let mut composite = vec![false; half];
    composite[0] = true;
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit_usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(prime_count_estimate(limit));
    primes.push(2);
    primes.extend(
        composite
            .iter()
            .enumerate()
            .filter(|&(i, &c)| !c && 2 * i + 1 <= limit_usize)
            .map(|(i, _)| (2 * i + 1) as u64),
    );
    Ok(PrimeTable { limit, primes })
}

fn prime_count_estimate(limit: u64) -> usize {
    let x = limit as f64;
    if x < 20.0 {
        8
    } else {
        (1.26 * x / x.ln()) as usize
    }
}

/// One prime power `prime^exp` of a factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub prime: u64,
    pub exp: u32,
}

/// Smallest prime factor, with `P^-(1) = infinity` kept as its own variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SmallestPrime {
    Finite(u64),
    Infinity,
}

/// An integer together with its prime powers in increasing prime order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factorization {
    n: u64,
    factors: Vec<PrimePower>,
}

impl Factorization {
    /// Validated constructor: primes strictly increasing, exponents positive,
    /// and the product equal to `n`. Primality of the entries is the caller's
    /// responsibility.
    pub fn from_factors(n: u64, factors: Vec<PrimePower>) -> Result<Self> {
        if n == 0 {
            return invalid("cannot factor 0");
        }
        let mut product: u64 = 1;
        let mut prev = 1;
        for pp in &factors {
            if pp.prime <= prev || pp.exp == 0 {
                return invalid(format!("malformed factor list for {n}: {factors:?}"));
            }
            prev = pp.prime;
            for _ in 0..pp.exp {
                product = match product.checked_mul(pp.prime) {
                    Some(v) => v,
                    None => return invalid(format!("factor product overflows for {n}")),
                };
            }
        }
        if product != n {
            return invalid(format!("factors multiply to {product}, not {n}"));
        }
        Ok(Factorization { n, factors })
    }

    pub fn one() -> Self {
        Factorization {
            n: 1,
            factors: Vec::new(),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[PrimePower] {
        &self.factors
    }

    /// Distinct primes, increasing.
    pub fn primes(&self) -> impl ExactSizeIterator<Item = u64> + Clone + '_ {
        self.factors.iter().map(|pp| pp.prime)
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// `P^+(n)`, with `P^+(1) = 1`.
    pub fn largest_prime(&self) -> u64 {
        self.factors.last().map_or(1, |pp| pp.prime)
    }

    /// `P^-(n)`, with `P^-(1) = infinity`.
    pub fn smallest_prime(&self) -> SmallestPrime {
        self.factors
            .first()
            .map_or(SmallestPrime::Infinity, |pp| SmallestPrime::Finite(pp.prime))
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|pp| pp.exp == 1)
    }

    /// Product of the distinct primes.
    pub fn radical(&self) -> u64 {
        self.primes().product()
    }

    pub fn divisible_by(&self, p: u64) -> bool {
        self.factors.binary_search_by_key(&p, |pp| pp.prime).is_ok()
    }

    fn reset(&mut self, n: u64) {
        self.n = n;
        self.factors.clear();
    }
}

/// Trial division by table primes up to `sqrt(n)`.
pub fn factorize(n: u64, table: &PrimeTable) -> Result<Factorization> {
    if n == 0 {
        return invalid("cannot factor 0");
    }
    table.require_cover(n)?;
    let mut rest = n;
    let mut factors = Vec::new();
    for &p in table.primes() {
        if p.saturating_mul(p) > rest {
            break;
        }
        if rest % p == 0 {
            let mut exp = 0;
            while rest % p == 0 {
                rest /= p;
                exp += 1;
            }
            factors.push(PrimePower { prime: p, exp });
        }
    }
    if rest > 1 {
        factors.push(PrimePower {
            prime: rest,
            exp: 1,
        });
    }
    Ok(Factorization { n, factors })
}

/// Moebius function: 0 on non-squarefree input, otherwise `(-1)^omega`.
pub fn mobius(fact: &Factorization) -> i8 {
    if !fact.is_squarefree() {
        0
    } else if fact.omega() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Primes `q` with `lo < q <= hi` for real bounds, compared in `f64`.
pub fn primes_in_interval(lo_exclusive: f64, hi_inclusive: f64, table: &PrimeTable) -> Result<Vec<u64>> {
    if hi_inclusive.is_nan() || lo_exclusive.is_nan() {
        return invalid("interval bounds must not be NaN");
    }
    if hi_inclusive > table.limit() as f64 {
        return Err(Error::InsufficientTable {
            needed: hi_inclusive.ceil() as u64,
            limit: table.limit(),
        });
    }
    Ok(table
        .primes()
        .iter()
        .copied()
        .filter(|&q| (q as f64) > lo_exclusive && (q as f64) <= hi_inclusive)
        .collect())
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Largest `k` such that the product of the first `k` primes is `<= n`.
fn max_omega(n: u64) -> usize {
    const SMALL: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    let mut product: u64 = 1;
    let mut k = 0;
    for p in SMALL {
        match product.checked_mul(p) {
            Some(v) if v <= n => {
                product = v;
                k += 1;
            }
            _ => break,
        }
    }
    k
}

/// Streams the factorization of every integer in `[a, b)` by segmented sieving.
#[derive(Debug, Clone)]
pub struct SegmentScanner<'t> {
    a: u64,
    b: u64,
    table: &'t PrimeTable,
    segment_size: usize,
}

impl<'t> SegmentScanner<'t> {
    pub fn new(a: u64, b: u64, table: &'t PrimeTable) -> Result<Self> {
        if a < 1 || a >= b {
            return invalid(format!("scan range must satisfy 1 <= a < b, got [{a}, {b})"));
        }
        let sqrt_last = isqrt(b - 1);
        if table.limit() < sqrt_last {
            return Err(Error::InsufficientTable {
                needed: sqrt_last,
                limit: table.limit(),
            });
        }
        Ok(SegmentScanner {
            a,
            b,
            table,
            segment_size: DEFAULT_SEGMENT_SIZE,
        })
    }

    pub fn with_segment_size(mut self, segment_size: usize) -> Result<Self> {
        if segment_size == 0 {
            return invalid("segment size must be positive");
        }
        self.segment_size = segment_size;
        Ok(self)
    }

    pub fn range(&self) -> (u64, u64) {
        (self.a, self.b)
    }

    /// Calls `visit` once per integer in increasing order. The factorization
    /// buffer is reused between calls.
    pub fn for_each<F: FnMut(&Factorization)>(&self, mut visit: F) {
        let mut block = SegmentBlock::default();
        let mut fact = Factorization::one();
        let mut lo = self.a;
        while lo < self.b {
            let hi = self
                .b
                .min(lo.saturating_add(self.segment_size as u64));
            block.sieve(lo, hi, self.table);
            for i in 0..(hi - lo) as usize {
                block.load(i, lo + i as u64, &mut fact);
                visit(&fact);
            }
            lo = hi;
        }
    }

    /// Owned-item iterator over the same sequence.
    pub fn iter(&self) -> SegmentScan<'t> {
        SegmentScan {
            scanner: self.clone(),
            block: SegmentBlock::default(),
            lo: self.a,
            hi: self.a,
            pos: 0,
        }
    }
}

/// Iterator over `[a, b)` that sieves one segment at a time.
pub fn segment_factor_scan(a: u64, b: u64, table: &PrimeTable) -> Result<SegmentScan<'_>> {
    Ok(SegmentScanner::new(a, b, table)?.iter())
}

pub struct SegmentScan<'t> {
    scanner: SegmentScanner<'t>,
    block: SegmentBlock,
    lo: u64,
    hi: u64,
    pos: usize,
}

impl Iterator for SegmentScan<'_> {
    type Item = Factorization;

    fn next(&mut self) -> Option<Factorization> {
        if self.lo + self.pos as u64 >= self.hi {
            if self.hi >= self.scanner.b {
                return None;
            }
            self.lo = self.hi;
            self.hi = self
                .scanner
                .b
                .min(self.lo.saturating_add(self.scanner.segment_size as u64));
            self.pos = 0;
            self.block.sieve(self.lo, self.hi, self.scanner.table);
        }
        let mut fact = Factorization::one();
        self.block.load(self.pos, self.lo + self.pos as u64, &mut fact);
        self.pos += 1;
        Some(fact)
    }
}

/// Per-segment factor slots: `slots` entries per integer.
#[derive(Debug, Default)]
struct SegmentBlock {
    slots: usize,
    count: Vec<u8>,
    primes: Vec<u32>,
    exps: Vec<u8>,
    found: Vec<u64>,
}

impl SegmentBlock {
    fn sieve(&mut self, lo: u64, hi: u64, table: &PrimeTable) {
        let len = (hi - lo) as usize;
        let last = hi - 1;
        // the cofactor above sqrt(last) is kept out of the slots
        self.slots = max_omega(last).max(1);
        self.count.clear();
        self.count.resize(len, 0);
        self.primes.clear();
        self.primes.resize(len * self.slots, 0);
        self.exps.clear();
        self.exps.resize(len * self.slots, 0);
        self.found.clear();
        self.found.resize(len, 1);

        let sqrt_last = isqrt(last);
        for &p in table.primes() {
            if p > sqrt_last {
                break;
            }
            let first = lo.div_ceil(p) * p;
            let mut idx = first - lo;
            while idx < len as u64 {
                let i = idx as usize;
                let slot = i * self.slots + self.count[i] as usize;
                self.primes[slot] = p as u32;
                self.exps[slot] = 1;
                self.count[i] += 1;
                self.found[i] *= p;
                idx += p;
            }
            let mut pk = p * p;
            while pk <= last {
                let first = lo.div_ceil(pk) * pk;
                let mut idx = first - lo;
                while idx < len as u64 {
                    let i = idx as usize;
                    let slot = i * self.slots + self.count[i] as usize - 1;
                    self.exps[slot] += 1;
                    self.found[i] *= p;
                    idx += pk;
                }
                pk = match pk.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
            }
        }
    }

    fn load(&self, i: usize, n: u64, fact: &mut Factorization) {
        fact.reset(n);
        let base = i * self.slots;
        for s in 0..self.count[i] as usize {
            fact.factors.push(PrimePower {
                prime: self.primes[base + s] as u64,
                exp: self.exps[base + s] as u32,
            });
        }
        let cofactor = n / self.found[i];
        if cofactor > 1 {
            fact.factors.push(PrimePower {
                prime: cofactor,
                exp: 1,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(prime: u64, exp: u32) -> PrimePower {
        PrimePower { prime, exp }
    }

    #[test]
    fn small_tables() {
        assert_eq!(build_prime_table(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(build_prime_table(2).unwrap().primes(), &[2]);
        assert_eq!(build_prime_table(3).unwrap().primes(), &[2, 3]);
        assert!(matches!(build_prime_table(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn factorize_examples() {
        let t = build_prime_table(200).unwrap();
        assert_eq!(factorize(12, &t).unwrap().factors(), &[pp(2, 2), pp(3, 1)]);
        assert!(factorize(1, &t).unwrap().factors().is_empty());
        assert_eq!(factorize(17408, &t).unwrap().factors(), &[pp(2, 10), pp(17, 1)]);
        // 199 * 197 needs no table prime above 197
        assert_eq!(factorize(39203, &t).unwrap().factors(), &[pp(197, 1), pp(199, 1)]);
    }

    #[test]
    fn factorize_rejects_short_table() {
        let t = build_prime_table(10).unwrap();
        assert!(factorize(100, &t).is_ok());
        assert!(matches!(
            factorize(101, &t),
            Err(Error::InsufficientTable { .. })
        ));
    }

    #[test]
    fn prime_extremes() {
        let t = build_prime_table(100).unwrap();
        let one = factorize(1, &t).unwrap();
        assert_eq!(one.largest_prime(), 1);
        assert_eq!(one.smallest_prime(), SmallestPrime::Infinity);
        let f = factorize(90, &t).unwrap();
        assert_eq!(f.largest_prime(), 5);
        assert_eq!(f.smallest_prime(), SmallestPrime::Finite(2));
        assert!(SmallestPrime::Finite(u64::MAX) < SmallestPrime::Infinity);
        assert_eq!(f.radical(), 30);
    }

    #[test]
    fn mobius_examples() {
        let t = build_prime_table(100).unwrap();
        assert_eq!(mobius(&factorize(1, &t).unwrap()), 1);
        assert_eq!(mobius(&factorize(30, &t).unwrap()), -1);
        assert_eq!(mobius(&factorize(12, &t).unwrap()), 0);
        assert_eq!(mobius(&factorize(6, &t).unwrap()), 1);
    }

    #[test]
    fn mertens_divisor_identity() {
        let t = build_prime_table(100).unwrap();
        for x in [10u64, 100, 1000] {
            let total: i64 = (1..=x)
                .map(|n| mobius(&factorize(n, &t).unwrap()) as i64 * (x / n) as i64)
                .sum();
            assert_eq!(total, 1, "x = {x}");
        }
    }

    #[test]
    fn real_intervals() {
        let t = build_prime_table(100).unwrap();
        assert_eq!(primes_in_interval(5.0, 7.172, &t).unwrap(), vec![7]);
        assert!(primes_in_interval(7.0, 10.827, &t).unwrap().is_empty());
        assert!(primes_in_interval(2.0, 2.336, &t).unwrap().is_empty());
        assert!(matches!(
            primes_in_interval(2.0, 100.5, &t),
            Err(Error::InsufficientTable { .. })
        ));
        assert_eq!(t.primes_between(11, 18).unwrap(), &[13, 17]);
        assert!(t.primes_between(7, 7).unwrap().is_empty());
    }

    #[test]
    fn segment_scan_small_ranges() {
        let t = build_prime_table(10).unwrap();
        let got: Vec<u64> = segment_factor_scan(10, 13, &t)
            .unwrap()
            .map(|f| f.n())
            .collect();
        assert_eq!(got, vec![10, 11, 12]);
        let ones: Vec<_> = segment_factor_scan(1, 2, &t).unwrap().collect();
        assert_eq!(ones, vec![Factorization::one()]);
        assert!(segment_factor_scan(5, 5, &t).is_err());
        assert!(matches!(
            segment_factor_scan(2, 200, &t),
            Err(Error::InsufficientTable { .. })
        ));
    }

    #[test]
    fn segment_size_does_not_change_output() {
        let t = build_prime_table(400).unwrap();
        let reference: Vec<_> = (1000..150_000u64).map(|n| factorize(n, &t).unwrap()).collect();
        for size in [1usize, 7, 4096, 1 << 20] {
            let scanner = SegmentScanner::new(1000, 150_000, &t)
                .unwrap()
                .with_segment_size(size)
                .unwrap();
            let mut got = Vec::with_capacity(reference.len());
            scanner.for_each(|f| got.push(f.clone()));
            assert_eq!(got, reference, "segment size {size}");
            let iterated: Vec<_> = scanner.iter().collect();
            assert_eq!(iterated, reference, "iterator, segment size {size}");
        }
    }

    #[test]
    fn large_cofactors() {
        let a = 1_000_000_000_000u64;
        let b = a + 5000;
        let t = build_prime_table(isqrt(b - 1)).unwrap();
        let scanner = SegmentScanner::new(a, b, &t).unwrap();
        scanner.for_each(|f| {
            let product: u128 = f
                .factors()
                .iter()
                .map(|pp| (pp.prime as u128).pow(pp.exp))
                .product();
            assert_eq!(product, f.n() as u128);
        });
    }

    #[test]
    fn isqrt_edges() {
        for n in [0u64, 1, 2, 3, 4, 15, 16, 17, u64::MAX, (1 << 32) - 1, 1 << 32] {
            let r = isqrt(n) as u128;
            assert!(r * r <= n as u128 && (r + 1) * (r + 1) > n as u128, "{n}");
        }
    }

    #[test]
    fn from_factors_validates() {
        assert!(Factorization::from_factors(12, vec![pp(2, 2), pp(3, 1)]).is_ok());
        assert!(Factorization::from_factors(12, vec![pp(3, 1), pp(2, 2)]).is_err());
        assert!(Factorization::from_factors(13, vec![pp(2, 2), pp(3, 1)]).is_err());
        assert!(Factorization::from_factors(1, vec![]).is_ok());
        assert!(Factorization::from_factors(0, vec![]).is_err());
    }
}
