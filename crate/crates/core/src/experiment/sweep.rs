use std::fs;
use std::path::PathBuf;

use super::config::{Method, SweepConfig};
use super::report::write_sweep_summary;
use super::run::{finish_run, first_stage, load_benchmark, write_json, RunRecord};
use super::svg::emit_forgetting_svg;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub lambdas: Vec<f64>,
    pub runs: Vec<RunRecord>,
    pub summary: PathBuf,
}

impl SweepRecord {
    /// Final-stage average F1 per arm, in lambda order.
    pub fn averages(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.stats.final_average).collect()
    }
}

/// Output directory of one sweep arm.
pub fn arm_dir(base: &std::path::Path, lambda: f64) -> PathBuf {
    base.join(format!("lambda_{lambda}"))
}

/// One MKT run per lambda over the same benchmark and seeds. Stage 1 has no
/// teacher, so it is trained once and shared by every arm.
pub fn run_sweep(sweep: &SweepConfig) -> Result<SweepRecord> {
    sweep.validate()?;
    let base = sweep.base.resolved();
    let root = base.output_dir.clone();
    fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
    write_json(&root.join("sweep.json"), sweep)?;

    let bench = load_benchmark(&base)?;
    let prefix = first_stage(&base, &bench)?;
    let mut runs = Vec::with_capacity(sweep.lambdas.len());
    for &lambda in &sweep.lambdas {
        let mut arm = base.clone();
        arm.method = Method::Mkt;
        arm.stage.lambda = lambda;
        arm.output_dir = arm_dir(&root, lambda);
        runs.push(finish_run(&arm, &bench, prefix.clone())?);
    }

    let domains = base.resolved_order();
    let finals: Vec<(f64, Vec<f64>)> = sweep
        .lambdas
        .iter()
        .zip(&runs)
        .map(|(&l, r)| (l, r.matrix.curve_row(r.matrix.stages())))
        .collect();
    let summary = root.join("sweep_summary.csv");
    write_sweep_summary(&summary, &domains, &finals)?;

    let labels: Vec<String> = sweep.lambdas.iter().map(|l| format!("lambda={l}")).collect();
    let series: Vec<(&str, &crate::eval::ForgettingMatrix)> =
        labels.iter().map(String::as_str).zip(runs.iter().map(|r| &r.matrix)).collect();
    emit_forgetting_svg(&series, &domains[0], &root.join("forgetting.svg"))?;

    Ok(SweepRecord {
        lambdas: sweep.lambdas.clone(),
        runs,
        summary,
    })
}
