//! Scenario runner behind the `isac-elmmse` command-line tool.
//!
//! Output CSV contract (UTF-8, `,` delimiter, header row):
//!
//! - results: `sweep_point,scheme,metric_mean,metric_stderr`
//! - timing sidecar: `sweep_point,scheme,wall_clock`
//! - traces: `iteration,objective,step_size,descent_gap`
//!
//! Wall-clock times live only in the sidecar so that the results file is
//! byte-identical across runs with the same seed.

mod config;
mod runner;
mod trace;

pub use config::{
    parse_config, ExperimentConfig, Scenario, Scheme, DESK_N_RX, DESK_N_TX, FULL_N_RX, FULL_N_TX,
};
pub use runner::{
    run_experiment, run_trace, timing_path, write_results_csv, write_timing_csv, Algorithm,
    ResultRow, ResultTable,
};
pub use trace::{export_trace, read_trace};
