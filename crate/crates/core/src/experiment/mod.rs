//! End-to-end runs: build or load a benchmark, train the domain sequence,
//! evaluate every domain after every stage and write the run directory.
//! Lambda sweeps repeat this per lambda over a shared first stage.

mod config;
mod report;
mod run;
mod svg;
mod sweep;

pub use config::{
    BenchmarkSource, CorpusFiles, ExperimentConfig, Method, ModelSettings, RunSnapshot, StagePatch, SweepConfig,
    RUN_KIND,
};
pub use report::{
    metrics_rows, read_metrics_csv, write_forgetting_csv, write_losses_csv, write_metrics_csv, write_sweep_summary,
    ForgettingRow, LossRow, MetricsRow,
};
pub use run::{load_benchmark, method_label, run_experiment, LoadedBenchmark, RunRecord};
pub use svg::{emit_forgetting_svg, render_forgetting_svg};
pub use sweep::{arm_dir, run_sweep, SweepRecord};
