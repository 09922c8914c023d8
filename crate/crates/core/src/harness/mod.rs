//! Seeded Monte Carlo experiments: configuration, execution, statistics and
//! output.

mod bounds_report;
mod config;
mod output;
mod runner;

pub use bounds_report::{bound_params, bounds_report, write_bounds_csv, BoundRow};
pub use config::{ChannelProfile, ExperimentConfig, IuiAwareConfig, SelectionConfig, Sweep, SweepPoint};
pub use output::{
    emit, emit_summary, mean_stderr, summarize, write_records_csv, write_summary_csv, Format, RunMetadata, RunOutput,
    SummaryRow, RECORD_COLUMNS,
};
pub use runner::{
    channel_hash, run_experiment, run_experiment_with_threads, run_trial, trial_rng, TrialRecord, RNG_ALGORITHM,
};
