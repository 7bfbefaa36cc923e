//! Slow reference implementations used as ground truth.
//!
//! Nothing here calls into the sieve, gap, or counting modules. Every
//! comparison against `p^Z` or `x^(1/Z)` is made in extended precision.

use std::collections::HashMap;

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::sieve::{Factorization, PrimePower};

const BITS: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// Trial division by every integer `2..=sqrt(n)`.
pub fn naive_factorize(n: u64) -> Factorization {
    assert!(n >= 1, "naive_factorize needs n >= 1");
    let mut rest = n;
    let mut factors = Vec::new();
    let mut d = 2u64;
    while d <= rest / d {
        if rest % d == 0 {
            let mut exp = 0;
            while rest % d == 0 {
                rest /= d;
                exp += 1;
            }
            factors.push(PrimePower { prime: d, exp });
        }
        d += 1;
    }
    if rest > 1 {
        factors.push(PrimePower { prime: rest, exp: 1 });
    }
    Factorization::from_factors(n, factors).expect("trial division yields a valid factorization")
}

fn naive_primes(n: u64) -> Vec<u64> {
    naive_factorize(n).factors().iter().map(|pp| pp.prime).collect()
}

/// `max_j ln(ln p_{j+1} / ln p_j)`, or `None` with fewer than two primes.
pub fn naive_f(n: u64) -> Option<f64> {
    let primes = naive_primes(n);
    let mut best: Option<f64> = None;
    for j in 0..primes.len().saturating_sub(1) {
        let value = ((primes[j + 1] as f64).ln() / (primes[j] as f64).ln()).ln();
        best = Some(match best {
            Some(b) if b >= value => b,
            _ => value,
        });
    }
    best
}

/// Extended-precision predicates for one `(x, c)`.
struct Exact {
    x: u64,
    z: BigFloat,
    ln_x: BigFloat,
    logs: HashMap<u64, BigFloat>,
    cc: Consts,
}

impl Exact {
    fn new(x: u64, c: f64) -> Self {
        let mut cc = Consts::new().expect("constants cache");
        let ln_x = BigFloat::from_u64(x, BITS).ln(BITS, RM, &mut cc);
        let z = BigFloat::from_f64(c, BITS).mul(&ln_x.ln(BITS, RM, &mut cc), BITS, RM);
        Exact {
            x,
            z,
            ln_x,
            logs: HashMap::new(),
            cc,
        }
    }

    fn ln(&mut self, v: u64) -> BigFloat {
        if let Some(l) = self.logs.get(&v) {
            return l.clone();
        }
        let l = BigFloat::from_u64(v, BITS).ln(BITS, RM, &mut self.cc);
        self.logs.insert(v, l.clone());
        l
    }

    /// `q <= p^Z`.
    fn within_power(&mut self, q: u64, p: u64) -> bool {
        let lhs = self.ln(q);
        let ln_p = self.ln(p);
        let rhs = self.z.mul(&ln_p, BITS, RM);
        lhs.cmp(&rhs).is_some_and(|s| s <= 0)
    }

    /// `p <= min(x^(1/Z), x)`.
    fn below_cutoff(&mut self, p: u64) -> bool {
        if p > self.x {
            return false;
        }
        if self.z.cmp(&BigFloat::from_u64(1, BITS)).is_some_and(|s| s <= 0) {
            return true;
        }
        let ln_p = self.ln(p);
        let lhs = self.z.mul(&ln_p, BITS, RM);
        lhs.cmp(&self.ln_x).is_some_and(|s| s <= 0)
    }

    /// `p | n` and no prime factor of `n` in `(p, p^Z]`.
    fn chi(&mut self, primes: &[u64], p: u64) -> bool {
        primes.contains(&p) && !primes.iter().any(|&q| q > p && self.within_power(q, p))
    }
}

/// Counts `n <= x` such that every prime `p <= y` dividing `n` has `chi_p(n) = 0`.
pub fn naive_n(x: u64, c: f64) -> u64 {
    let mut exact = Exact::new(x, c);
    (1..=x)
        .filter(|&n| {
            let primes = naive_primes(n);
            primes
                .iter()
                .all(|&p| !exact.below_cutoff(p) || !exact.chi(&primes, p))
        })
        .count() as u64
}

/// Counts `n <= x` with `chi_p(n) = 1` for every `p` in `m_primes`.
pub fn naive_chi_count(m_primes: &[u64], x: u64, c: f64) -> u64 {
    let mut exact = Exact::new(x, c);
    (1..=x)
        .filter(|&n| {
            let primes = naive_primes(n);
            m_primes.iter().all(|&p| exact.chi(&primes, p))
        })
        .count() as u64
}

/// Prime lists of the wide set by filtering every `m <= x`, ordered by `(k, m)`.
pub fn naive_wide_set(x: u64, c: f64) -> Vec<Vec<u64>> {
    let mut exact = Exact::new(x, c);
    let mut found: Vec<(usize, u64, Vec<u64>)> = Vec::new();
    for m in 1..=x {
        let fact = naive_factorize(m);
        if fact.factors().iter().any(|pp| pp.exp > 1) {
            continue;
        }
        let primes = naive_primes(m);
        if !primes.iter().all(|&p| exact.below_cutoff(p)) {
            continue;
        }
        if primes.windows(2).any(|w| exact.within_power(w[1], w[0])) {
            continue;
        }
        found.push((primes.len(), m, primes));
    }
    found.sort();
    found.into_iter().map(|(_, _, primes)| primes).collect()
}

/// `sum_m mu(m) naive_chi_count(m)` over the brute-forced wide set.
pub fn naive_n_by_inclusion_exclusion(x: u64, c: f64) -> i64 {
    naive_wide_set(x, c)
        .iter()
        .map(|primes| {
            let sign = if primes.len() % 2 == 0 { 1 } else { -1 };
            sign * naive_chi_count(primes, x, c) as i64
        })
        .sum()
}
