//! Exact decisions for `q <= p^Z` and `p <= x^(1/Z)` with `Z = c ln ln x`.
//!
//! Both reduce to the sign of `ln a - Z ln b` for positive integers `a, b`.
//! The double-precision value decides unless it falls within
//! [`BOUNDARY_BAND`] of zero, in which case the sign is recomputed with
//! [`EXTENDED_PRECISION_BITS`]-bit software floats, deriving `Z` from `(x, c)`
//! rather than from the rounded double.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::sync::OnceLock;

use astro_float::{BigFloat, Consts, RoundingMode};

/// Width of the band around zero that triggers extended precision.
pub const BOUNDARY_BAND: f64 = 1e-9;

/// About 57 significant decimal digits.
pub const EXTENDED_PRECISION_BITS: usize = 192;

const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Double precision, extended precision inside the band.
    #[default]
    Standard,
    /// Double precision only. Used to check that the fallback never matters.
    DoubleOnly,
    /// Extended precision for every comparison.
    AlwaysExtended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundaryStats {
    /// Comparisons evaluated in extended precision.
    pub extended: u64,
    /// Extended-precision comparisons whose sign differed from the double one.
    pub corrected: u64,
}

/// Comparator bound to one `(x, c)` pair.
#[derive(Debug)]
pub struct Boundary {
    x: u64,
    c: f64,
    z: f64,
    policy: BoundaryPolicy,
    flip: Option<(u64, u64)>,
    z_extended: OnceLock<BigFloat>,
    extended: AtomicU64,
    corrected: AtomicU64,
}

impl Clone for Boundary {
    fn clone(&self) -> Self {
        Boundary {
            x: self.x,
            c: self.c,
            z: self.z,
            policy: self.policy,
            flip: self.flip,
            z_extended: self.z_extended.clone(),
            extended: AtomicU64::new(self.extended.load(AtomicOrdering::Relaxed)),
            corrected: AtomicU64::new(self.corrected.load(AtomicOrdering::Relaxed)),
        }
    }
}

impl Boundary {
    /// `x >= 16` and `c > 0` are validated by the caller.
    pub(crate) fn new(x: u64, c: f64, policy: BoundaryPolicy) -> Self {
        Boundary {
            x,
            c,
            z: c * (x as f64).ln().ln(),
            policy,
            flip: None,
            z_extended: OnceLock::new(),
            extended: AtomicU64::new(0),
            corrected: AtomicU64::new(0),
        }
    }

    /// Inverts the outcome of the single comparison `ln a` vs `Z ln b`.
    /// Only meant for negative-control runs of the verifier.
    pub fn inject_flip(&mut self, a: u64, b: u64) {
        self.flip = Some((a, b));
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn policy(&self) -> BoundaryPolicy {
        self.policy
    }

    pub fn stats(&self) -> BoundaryStats {
        BoundaryStats {
            extended: self.extended.load(AtomicOrdering::Relaxed),
            corrected: self.corrected.load(AtomicOrdering::Relaxed),
        }
    }

    /// Sign of `ln a - Z ln b`.
    pub fn compare(&self, a: u64, b: u64) -> Ordering {
        debug_assert!(a >= 1 && b >= 1);
        let diff = (a as f64).ln() - self.z * (b as f64).ln();
        let fast = diff.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
        let use_extended = match self.policy {
            BoundaryPolicy::Standard => diff.abs() < BOUNDARY_BAND,
            BoundaryPolicy::DoubleOnly => false,
            BoundaryPolicy::AlwaysExtended => true,
        };
        let decided = if use_extended {
            let exact = self.compare_extended(a, b);
            self.extended.fetch_add(1, AtomicOrdering::Relaxed);
            if exact != fast {
                self.corrected.fetch_add(1, AtomicOrdering::Relaxed);
            }
            exact
        } else {
            fast
        };
        if self.flip == Some((a, b)) {
            decided.reverse()
        } else {
            decided
        }
    }

    /// `q <= p^Z`.
    pub fn le_pow(&self, q: u64, p: u64) -> bool {
        self.compare(q, p) != Ordering::Greater
    }

    /// `p <= x^(1/Z)`, i.e. `p^Z <= x`.
    pub fn le_root(&self, p: u64) -> bool {
        self.compare(self.x, p) != Ordering::Less
    }

    /// Largest integer `k` with `k <= p^Z`, saturating at `u64::MAX`.
    pub fn floor_pow(&self, p: u64) -> u64 {
        let estimate = (self.z * (p as f64).ln()).exp();
        let mut k = if estimate >= u64::MAX as f64 {
            u64::MAX
        } else {
            (estimate.floor() as u64).max(1)
        };
        while k > 1 && !self.le_pow(k, p) {
            k -= 1;
        }
        while k < u64::MAX && self.le_pow(k + 1, p) {
            k += 1;
        }
        k
    }

    /// Largest integer `k <= x` with `k^Z <= x`.
    pub fn floor_root(&self) -> u64 {
        if self.z <= 1.0 {
            return self.x;
        }
        let estimate = ((self.x as f64).ln() / self.z).exp();
        let mut k = (estimate.floor() as u64).clamp(1, self.x);
        while k > 1 && !self.le_root(k) {
            k -= 1;
        }
        while k < self.x && self.le_root(k + 1) {
            k += 1;
        }
        k
    }

    fn compare_extended(&self, a: u64, b: u64) -> Ordering {
        let mut cc = Consts::new().expect("constants cache");
        let z = self.z_extended.get_or_init(|| {
            let mut cc = Consts::new().expect("constants cache");
            let x = BigFloat::from_u64(self.x, EXTENDED_PRECISION_BITS);
            let lnln = x
                .ln(EXTENDED_PRECISION_BITS, RM, &mut cc)
                .ln(EXTENDED_PRECISION_BITS, RM, &mut cc);
            BigFloat::from_f64(self.c, EXTENDED_PRECISION_BITS).mul(&lnln, EXTENDED_PRECISION_BITS, RM)
        });
        let ln_a = BigFloat::from_u64(a, EXTENDED_PRECISION_BITS).ln(EXTENDED_PRECISION_BITS, RM, &mut cc);
        let ln_b = BigFloat::from_u64(b, EXTENDED_PRECISION_BITS).ln(EXTENDED_PRECISION_BITS, RM, &mut cc);
        let rhs = z.mul(&ln_b, EXTENDED_PRECISION_BITS, RM);
        match ln_a.cmp(&rhs) {
            Some(s) if s < 0 => Ordering::Less,
            Some(s) if s > 0 => Ordering::Greater,
            _ => Ordering::Equal,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree_away_from_the_band() {
        let fast = Boundary::new(30, 1.0, BoundaryPolicy::DoubleOnly);
        let exact = Boundary::new(30, 1.0, BoundaryPolicy::AlwaysExtended);
        for p in 2..60u64 {
            for q in 2..200u64 {
                assert_eq!(fast.compare(q, p), exact.compare(q, p), "q={q} p={p}");
            }
        }
        assert_eq!(exact.stats().corrected, 0);
        assert!(exact.stats().extended > 0);
    }

    #[test]
    fn floors_at_x30() {
        let b = Boundary::new(30, 1.0, BoundaryPolicy::Standard);
        // Z ~ 1.22413: 5^Z ~ 7.17, 7^Z ~ 10.83, 11^Z ~ 18.85, 2^Z ~ 2.34
        assert_eq!(b.floor_pow(2), 2);
        assert_eq!(b.floor_pow(5), 7);
        assert_eq!(b.floor_pow(7), 10);
        assert_eq!(b.floor_pow(11), 18);
        assert_eq!(b.floor_root(), 16);
    }

    #[test]
    fn root_cap_when_z_small() {
        let b = Boundary::new(16, 1e-3, BoundaryPolicy::Standard);
        assert_eq!(b.floor_root(), 16);
        assert_eq!(b.floor_pow(7), 1);
    }

    #[test]
    fn saturates() {
        let b = Boundary::new(1 << 40, 50.0, BoundaryPolicy::Standard);
        assert_eq!(b.floor_pow(1_000_003), u64::MAX);
    }

    #[test]
    fn extended_decides_a_near_tie() {
        // c chosen so that Z ln 2 = ln 7 up to double rounding: 7 = 2^Z exactly
        // is not representable, so the extended value must be strict.
        let x = 1_000_000u64;
        let c = (7f64.ln() / 2f64.ln()) / (x as f64).ln().ln();
        let b = Boundary::new(x, c, BoundaryPolicy::Standard);
        let ord = b.compare(7, 2);
        assert_eq!(b.stats().extended, 1);
        assert_ne!(ord, Ordering::Equal);
    }

    #[test]
    fn injected_flip() {
        let mut b = Boundary::new(30, 1.0, BoundaryPolicy::Standard);
        assert!(b.le_root(16));
        b.inject_flip(30, 16);
        assert!(!b.le_root(16));
        assert!(b.le_root(15));
    }
}
