//! TOML-driven scenarios, calibrated tolerances and artifact output.

pub mod config;
pub mod scenarios;
pub mod svg;
pub mod tolerances;

pub use config::*;
pub use scenarios::{run_file, run_scenario, Measurement, RunOptions, ScenarioOutcome, Status, SCENARIOS};
pub use tolerances::{ToleranceEntry, Tolerances, TOLERANCES_ENV};
