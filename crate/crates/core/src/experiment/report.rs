//! CSV artifacts of a run.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{ForgettingMatrix, ForgettingStats, MetricsReport};
use crate::training::StageHistory;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub stage: usize,
    pub domain: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgettingRow {
    pub domain: String,
    pub trained_at_stage: usize,
    pub peak_f1: f64,
    pub final_f1: f64,
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub stage: usize,
    pub domain: String,
    pub epoch: usize,
    pub l_hard: f64,
    pub l_soft: f64,
    pub combined: f64,
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn metrics_rows(matrix: &ForgettingMatrix) -> Vec<MetricsRow> {
    let mut rows = Vec::new();
    for (k, row) in matrix.reports.iter().enumerate() {
        for (name, r) in matrix.domains.iter().zip(row) {
            rows.push(MetricsRow {
                stage: k + 1,
                domain: name.clone(),
                tp: r.tp,
                fp: r.fp,
                fn_: r.fn_,
                precision: r.precision,
                recall: r.recall,
                f1: r.f1,
            });
        }
    }
    rows
}

pub fn write_metrics_csv(path: &Path, matrix: &ForgettingMatrix) -> Result<()> {
    write_rows(path, metrics_rows(matrix))
}

pub fn write_forgetting_csv(path: &Path, stats: &ForgettingStats) -> Result<()> {
    write_rows(
        path,
        stats.per_domain.iter().map(|d| ForgettingRow {
            domain: d.domain.clone(),
            trained_at_stage: d.trained_at_stage,
            peak_f1: d.peak_f1,
            final_f1: d.final_f1,
            drop: d.drop,
        }),
    )
}

pub fn write_losses_csv(path: &Path, histories: &[StageHistory]) -> Result<()> {
    let rows = histories.iter().flat_map(|h| {
        h.epochs.iter().enumerate().map(|(e, l)| LossRow {
            stage: h.stage,
            domain: h.domain.clone(),
            epoch: e + 1,
            l_hard: l.l_hard,
            l_soft: l.l_soft,
            combined: l.combined,
        })
    });
    write_rows(path, rows)
}

/// Rebuilds the stage × domain grid from a `metrics.csv`. Domains keep the
/// order of their first appearance and are assumed to have been trained in
/// that order. Sentence totals are not stored in the file and read back as 0.
pub fn read_metrics_csv(path: &Path) -> Result<ForgettingMatrix> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut rows: Vec<MetricsRow> = Vec::new();
    for row in r.deserialize() {
        rows.push(row.map_err(csv_err(path))?);
    }
    let bad = |m: String| Error::Config(format!("{}: {m}", path.display()));
    let mut domains: Vec<String> = Vec::new();
    for row in &rows {
        if !domains.contains(&row.domain) {
            domains.push(row.domain.clone());
        }
    }
    let stages = rows.iter().map(|r| r.stage).max().unwrap_or(0);
    if stages == 0 || rows.len() != stages * domains.len() {
        return Err(bad(format!(
            "expected one row per stage and domain, found {} rows for {} domains",
            rows.len(),
            domains.len()
        )));
    }
    let mut matrix = ForgettingMatrix::sequential(domains.clone());
    for k in 1..=stages {
        let mut line = Vec::with_capacity(domains.len());
        for name in &domains {
            let row = rows
                .iter()
                .find(|r| r.stage == k && &r.domain == name)
                .ok_or_else(|| bad(format!("missing stage {k} row for `{name}`")))?;
            line.push(MetricsReport {
                precision: row.precision,
                recall: row.recall,
                f1: row.f1,
                ..MetricsReport::from_counts(row.tp, row.fp, row.fn_, 0)
            });
        }
        matrix.push_stage(line)?;
    }
    Ok(matrix)
}

/// `lambda,<domain...>,avg`, one row per sweep arm.
pub fn write_sweep_summary(path: &Path, domains: &[String], arms: &[(f64, Vec<f64>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header = vec!["lambda".to_string()];
    header.extend(domains.iter().cloned());
    header.push("avg".into());
    w.write_record(&header).map_err(csv_err(path))?;
    for (lambda, finals) in arms {
        let avg = finals.iter().sum::<f64>() / finals.len() as f64;
        let mut record = vec![lambda.to_string()];
        record.extend(finals.iter().map(f64::to_string));
        record.push(avg.to_string());
        w.write_record(&record).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
