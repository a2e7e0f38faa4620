//! Sentence-level correction metrics and the stage × domain F1 grid.

mod forgetting;
mod metrics;

pub use forgetting::{forgetting_stats, DomainForgetting, ForgettingMatrix, ForgettingStats};
pub use metrics::{detection_f1, judge, sentence_f1, MetricsReport, SentenceJudgment};

use crate::corpus::ParallelSentence;
use crate::error::Result;
use crate::model::CorrectionModel;

/// Predicts every sentence and scores the predictions.
pub fn evaluate<M: CorrectionModel>(model: &M, sentences: &[ParallelSentence]) -> Result<MetricsReport> {
    let triples = predict_all(model, sentences)?;
    sentence_f1(&triples)
}

/// `(source, prediction, target)` ids of one sentence.
pub type Triple = (Vec<u32>, Vec<u32>, Vec<u32>);

/// Triples for every sentence, batched.
pub fn predict_all<M: CorrectionModel>(
    model: &M,
    sentences: &[ParallelSentence],
) -> Result<Vec<Triple>> {
    let mut out = Vec::with_capacity(sentences.len());
    for chunk in sentences.chunks(256) {
        let inputs: Vec<&[u32]> = chunk.iter().map(|s| s.source()).collect();
        let ids = model.forward_batch(&inputs)?.argmax();
        let mut offset = 0;
        for s in chunk {
            let pred = ids[offset..offset + s.len()].to_vec();
            offset += s.len();
            out.push((s.source().to_vec(), pred, s.target().to_vec()));
        }
    }
    Ok(out)
}
