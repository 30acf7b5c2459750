//! Experiment runner: builds problems from a TOML config, runs every
//! (problem, solver, seed) cell in parallel, and writes traces,
//! certificate reports and a summary table.

pub mod build;
pub mod config;
pub mod runner;
pub mod trace_io;

pub use config::{ConfigError, ExperimentConfig};
pub use runner::{run_all, CellOutcome, CellStatus, Prepared, RunOptions};
