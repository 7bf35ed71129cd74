//! Verification suites for the `mehler` library and their reports.
//!
//! A run is described by an [`ExperimentConfig`] (TOML file plus flag
//! overrides), executes every check of the selected suite and emits one
//! record per check as JSON or CSV.

pub mod checks;
pub mod config;
pub mod report;
pub mod suites;

pub use config::{ExperimentConfig, Format, Overrides, Suite, UsageError};
pub use report::{emit_report, Record, Report, Verdict};
pub use suites::run_suite;
