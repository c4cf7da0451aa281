//! Configuration-driven benchmark runner for `fcmg-core`: single runs,
//! parameter sweeps, JSON and CSV reports, and text tables.

pub mod config;
pub mod report;
pub mod sweep;
pub mod tables;

pub use config::{BenchmarkConfig, ConfigError, ModeName, SmootherName};
pub use report::{run, RunOutcome, RunReport, Status, SCHEMA_VERSION};
pub use sweep::{run_sweep, SweepRow, SweepSpec};
