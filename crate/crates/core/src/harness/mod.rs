//! Experiment harness: configuration, sweeps, the disk oracle, structured
//! output, and the acceptance suite behind the `verify` subcommand.

pub mod acceptance;
pub mod config;
pub mod emit;
pub mod oracle;
pub mod sweep;

pub use config::{ExperimentConfig, ProblemKind};
pub use emit::{emit, EmitFormat};
pub use oracle::{image_series_oracle, ImageSeriesOracle};
pub use sweep::{
    fit_column, fit_rate, run_sweep, run_sweep_tasks, RateFit, SweepOutcome, SweepRow, SweepTask,
};
