//! Configuration-driven experiment runner for the `lntail` estimators:
//! single estimates, threshold sweeps and lemma diagnostics, written as CSV.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{ConfigError, Experiment, ExperimentConfig, GammaGrid};
pub use runner::{
    diagnose, run_estimate, run_sweep, DiagnosticsReport, RowOutcome, RunError, SweepReport,
};
