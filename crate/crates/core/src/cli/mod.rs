//! Configuration, sweeps and CSV output behind the command-line tool.

pub mod config;
pub mod selftest;
pub mod sweep;

pub use config::{parse_config, print_config, ConfigError, RunConfig, SnrRange};
pub use sweep::{format_g12, run_sweep, to_csv, Metric, SweepError, SweepRecord, CSV_HEADER};
