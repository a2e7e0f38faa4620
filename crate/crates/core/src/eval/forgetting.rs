use serde::{Deserialize, Serialize};

use super::metrics::MetricsReport;
use crate::error::{Error, Result};

/// Sentence-level F1 of the post-stage-`k` student on each domain's test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgettingMatrix {
    pub domains: Vec<String>,
    /// `trained_at[j]`: 1-based stage that trained domain `j`, if any.
    pub trained_at: Vec<Option<usize>>,
    /// `reports[k - 1][j]`.
    pub reports: Vec<Vec<MetricsReport>>,
}

impl ForgettingMatrix {
    /// Domains trained in their listed order: domain `j` at stage `j + 1`.
    pub fn sequential(domains: Vec<String>) -> Self {
        let trained_at = (1..=domains.len()).map(Some).collect();
        Self {
            domains,
            trained_at,
            reports: Vec::new(),
        }
    }

    pub fn push_stage(&mut self, row: Vec<MetricsReport>) -> Result<()> {
        if row.len() != self.domains.len() {
            return Err(Error::ShapeMismatch(format!(
                "stage row has {} entries for {} domains",
                row.len(),
                self.domains.len()
            )));
        }
        self.reports.push(row);
        Ok(())
    }

    pub fn stages(&self) -> usize {
        self.reports.len()
    }

    pub fn domain_index(&self, name: &str) -> Result<usize> {
        self.domains
            .iter()
            .position(|d| d == name)
            .ok_or_else(|| Error::UnknownDomain(name.to_string()))
    }

    /// F1 after `stage` (1-based) on domain `j`.
    pub fn f1(&self, stage: usize, domain: usize) -> f64 {
        self.reports[stage - 1][domain].f1
    }

    /// F1 of one domain after every stage.
    pub fn curve(&self, domain: usize) -> Vec<f64> {
        self.reports.iter().map(|row| row[domain].f1).collect()
    }

    /// F1 of every domain after `stage` (1-based).
    pub fn curve_row(&self, stage: usize) -> Vec<f64> {
        self.reports[stage - 1].iter().map(|r| r.f1).collect()
    }

    /// The domain had not been trained yet when stage `stage` finished.
    pub fn is_zero_shot(&self, stage: usize, domain: usize) -> bool {
        self.trained_at[domain].is_none_or(|k| k > stage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainForgetting {
    pub domain: String,
    pub trained_at_stage: usize,
    /// F1 right after the domain's own stage.
    pub peak_f1: f64,
    pub final_f1: f64,
    /// `peak_f1 - final_f1`.
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgettingStats {
    pub per_domain: Vec<DomainForgetting>,
    /// Mean final-stage F1 over every domain.
    pub final_average: f64,
}

impl ForgettingStats {
    pub fn drop_of(&self, domain: &str) -> Option<f64> {
        self.per_domain.iter().find(|d| d.domain == domain).map(|d| d.drop)
    }
}

pub fn forgetting_stats(matrix: &ForgettingMatrix) -> Result<ForgettingStats> {
    let m = matrix.stages();
    if m == 0 {
        return Err(Error::EmptyInput("forgetting matrix"));
    }
    let mut per_domain = Vec::new();
    for (j, name) in matrix.domains.iter().enumerate() {
        let Some(k) = matrix.trained_at[j] else { continue };
        if k > m {
            continue;
        }
        let peak = matrix.f1(k, j);
        let last = matrix.f1(m, j);
        per_domain.push(DomainForgetting {
            domain: name.clone(),
            trained_at_stage: k,
            peak_f1: peak,
            final_f1: last,
            drop: peak - last,
        });
    }
    let final_row = &matrix.reports[m - 1];
    let final_average = final_row.iter().map(|r| r.f1).sum::<f64>() / final_row.len() as f64;
    Ok(ForgettingStats {
        per_domain,
        final_average,
    })
}
