//! Library surface of the benchmark harness: configuration, trial and sweep
//! execution, result rows, presets and plot-data emission. The `mp-bench`
//! binary is a thin wrapper over these.

pub mod config;
pub mod preset;
pub mod row;
pub mod sweep;

pub use config::{ExperimentConfig, NnKind, PlannerId, ScenarioConfig, StrategyConfig};
pub use preset::preset;
pub use row::{parse_rows, ResultRow, CSV_HEADER, FORMAT_VERSION};
pub use sweep::{emit_plot_data, percentile_nearest_rank, run_sweep, run_trial, TrialSpec};
