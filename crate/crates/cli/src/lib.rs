//! Command-line front end: scans, density tables, exact counts, the wide
//! set, and self-verification, written as JSON or CSV.

pub mod app;
pub mod format;
pub mod report;
pub mod verify;

pub use app::{run, run_with};
