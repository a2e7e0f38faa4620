use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentence-level outcome of one correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SentenceJudgment {
    /// The source contains at least one error.
    pub erroneous: bool,
    /// The prediction differs from the source.
    pub modified: bool,
    /// The prediction equals the target exactly.
    pub fully_corrected: bool,
}

pub fn judge(source: &[u32], prediction: &[u32], target: &[u32]) -> Result<SentenceJudgment> {
    if source.len() != prediction.len() || source.len() != target.len() {
        return Err(Error::ShapeMismatch(format!(
            "source {}, prediction {}, target {} characters",
            source.len(),
            prediction.len(),
            target.len()
        )));
    }
    Ok(SentenceJudgment {
        erroneous: source != target,
        modified: prediction != source,
        fully_corrected: prediction == target,
    })
}

/// Correction-level sentence metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_sentences: usize,
    /// Nothing was modified, so precision is reported as 0.
    pub precision_undefined: bool,
    /// Nothing was erroneous, so recall is reported as 0.
    pub recall_undefined: bool,
}

impl MetricsReport {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, n_sentences: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
            n_sentences,
            precision_undefined: tp + fp == 0,
            recall_undefined: tp + fn_ == 0,
        }
    }

    pub fn from_judgments<I: IntoIterator<Item = SentenceJudgment>>(judgments: I) -> Result<Self> {
        let (mut tp, mut fp, mut fn_, mut n) = (0, 0, 0, 0);
        for j in judgments {
            n += 1;
            let hit = j.erroneous && j.fully_corrected;
            if hit {
                tp += 1;
            }
            if j.modified && !hit {
                fp += 1;
            }
            if j.erroneous && !j.fully_corrected {
                fn_ += 1;
            }
        }
        if n == 0 {
            return Err(Error::EmptyInput("metric triples"));
        }
        Ok(Self::from_counts(tp, fp, fn_, n))
    }
}

/// Strict sentence-level F1 over `(source, prediction, target)` triples: a
/// true positive is an erroneous sentence returned exactly equal to its
/// target; any other modified sentence is a false positive; any erroneous
/// sentence not fully corrected is a false negative.
pub fn sentence_f1<S: AsRef<[u32]>>(triples: &[(S, S, S)]) -> Result<MetricsReport> {
    let judgments = triples
        .iter()
        .map(|(s, p, t)| judge(s.as_ref(), p.as_ref(), t.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    MetricsReport::from_judgments(judgments)
}

/// Detection-level diagnostic: a sentence counts as detected when the set of
/// changed positions equals the set of erroneous positions, regardless of the
/// characters written there.
pub fn detection_f1<S: AsRef<[u32]>>(triples: &[(S, S, S)]) -> Result<MetricsReport> {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (s, p, t) in triples {
        let j = judge(s.as_ref(), p.as_ref(), t.as_ref())?;
        let detected = s
            .as_ref()
            .iter()
            .zip(p.as_ref())
            .zip(t.as_ref())
            .all(|((s, p), t)| (s != p) == (s != t));
        let hit = j.erroneous && detected;
        tp += hit as usize;
        fp += (j.modified && !hit) as usize;
        fn_ += (j.erroneous && !hit) as usize;
    }
    if triples.is_empty() {
        return Err(Error::EmptyInput("metric triples"));
    }
    Ok(MetricsReport::from_counts(tp, fp, fn_, triples.len()))
}
