//! Experiment configuration, trace persistence, run summaries and the `minmax-bench` CLI.

mod cli;
mod config;
mod experiments;
mod invariants;
mod summary;
mod trace;

pub use cli::cli_main;
pub use config::{load_auc_dataset, BuiltProblem, ExperimentConfig, ProblemSpec, SamplingChoice, DATASET_ENV};
pub use experiments::{
    gap_radius_factor, operator_lipschitz, reference_point, rep_path, run_auc_experiment, run_cubic_experiment,
    run_experiment, run_single, theorem_bound, theorem_constant, tune_step_c, AlgoRun, AucExperiment, AucOptions,
    BoundViolation, CubicExperiment, CubicOptions, STEP_GRID,
};
pub use invariants::{replay_invariants, InvariantKind, Violation};
pub use summary::{fit_loglog_slope, status_label, RunSummary, MIN_SLOPE_ROWS};
pub use trace::{
    emit_trace, parse_trace, parse_trace_str, render_trace, TraceFile, TraceFormat, TraceHeader, TRACE_COLUMNS,
};
