//! Twin experiments: problem presets, truth and observations, the
//! assimilation loop, diagnostics and output files.

pub mod config;
pub mod diagnostics;
pub mod output;
pub mod problems;
pub mod riemann;
pub mod run;

pub use config::{ExperimentConfig, Problem, Scale};
pub use problems::TruthRecord;
pub use run::{Experiment, RunFailure, RunResult};
