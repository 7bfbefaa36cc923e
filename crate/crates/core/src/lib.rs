//! Largest gap between consecutive prime factors of integers.
//!
//! * [`sieve`]: prime tables, factorization, segmented range factorization.
//! * [`gaps`]: the gap statistic `f(n)` and mergeable range summaries.
//! * [`counting`]: exact inclusion-exclusion counting of integers whose small
//!   prime factors have no large gap, with Bonferroni truncations and
//!   Mertens-type products.
//! * [`boundary`]: exact decisions for comparisons against `p^Z`.
//! * [`oracle`]: slow, independent reference implementations.

pub mod boundary;
pub mod counting;
pub mod error;
pub mod gaps;
pub mod oracle;
pub mod sieve;

pub use error::{Error, Result};
