//! Configuration, run orchestration and output persistence.

pub mod config;
pub mod output;
pub mod run;

pub use config::{ConfigError, Problem, RunConfig, Scheme};
pub use output::{write_outputs, OutputError};
pub use run::{run_simulation, InvariantSeries, RunError, RunResult, SimState};
