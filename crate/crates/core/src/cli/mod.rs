//! Config-driven experiment driver: parse a scenario file, run analytic
//! sweeps, Monte Carlo sweeps, optimizer queries, agreement reports, or
//! the distributional validation suite, and emit figure-ready tables plus
//! a run manifest.

pub mod commands;
pub mod config;
pub mod table;

pub use commands::{execute, CommandKind, Overrides};
pub use config::{ConfigFile, Experiment, OutputFormat, PolicyPlan};
