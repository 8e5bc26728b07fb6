//! Experiment orchestration: configs, seeded repetitions, learning-rate
//! sweeps and summary reports.

pub mod config;
pub mod counterexample;
pub mod experiment;
pub mod report;
pub mod sweep;

pub use config::{DatasetSource, PrimingHyper, RunConfig, SweepConfig};
pub use counterexample::{run_counterexample, CounterexampleReport};
pub use experiment::{
    csv_header, run_experiment, run_prepared, Manifest, Prepared, RepetitionOutcome,
    RepetitionStatus, RunOptions, RunOutcome,
};
pub use report::{report, Summary, SummaryRow};
pub use sweep::{sweep, sweep_prepared, SweepReport};
