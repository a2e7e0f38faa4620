use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{check_lambda, combined_dlogits, distill_loss, hard_loss, LossBreakdown};
use super::optim::{Optimizer, OptimizerKind};
use crate::corpus::{DomainCorpus, ParallelSentence};
use crate::error::{Error, Result};
use crate::model::CorrectionModel;

/// Hyperparameters of one training stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Weight of the distillation term.
    pub lambda: f64,
    pub shuffle_seed: u64,
    pub optimizer: OptimizerKind,
}

impl StageConfig {
    /// Learning rate used for fine-tuning pretrained backbones; too small for
    /// the from-scratch tagger but kept selectable.
    pub const PRETRAINED_LEARNING_RATE: f64 = 5e-5;

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        if self.epochs == 0 {
            return Err(Error::InvalidStageConfig("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidStageConfig("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidStageConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

impl Default for StageConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 64,
            learning_rate: 5e-3,
            lambda: 0.01,
            shuffle_seed: 0,
            optimizer: OptimizerKind::default(),
        }
    }
}

/// A frozen teacher: the model plus a checksum of its parameters taken at
/// construction.
#[derive(Debug, Clone)]
pub struct TeacherHandle<M> {
    model: M,
    checksum: String,
}

impl<M: CorrectionModel> TeacherHandle<M> {
    /// Copies `student` and freezes the copy.
    pub fn freeze(student: &M) -> Self {
        let model = student.clone();
        let checksum = model.checksum();
        Self { model, checksum }
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn verify(&self, stage: usize) -> Result<()> {
        let now = self.model.checksum();
        if now != self.checksum {
            return Err(Error::TeacherModified {
                stage,
                before: self.checksum.clone(),
                after: now,
            });
        }
        Ok(())
    }
}

/// Read access to a stage's training split. The stage loop only reaches
/// sentences through this trait.
pub trait StageData {
    fn name(&self) -> &str;
    fn train_len(&self) -> usize;
    fn train_sentence(&self, index: usize) -> &ParallelSentence;
}

impl StageData for DomainCorpus {
    fn name(&self) -> &str {
        &self.name
    }

    fn train_len(&self) -> usize {
        self.train.len()
    }

    fn train_sentence(&self, index: usize) -> &ParallelSentence {
        &self.train[index]
    }
}

/// Losses of one stage, one token-weighted mean per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageHistory {
    pub stage: usize,
    pub domain: String,
    pub epochs: Vec<LossBreakdown>,
    pub checkpoint: Option<PathBuf>,
}

/// Trains `student` on one domain. With a teacher, every batch also runs the
/// teacher on the same inputs and adds `lambda` times the distillation
/// gradient; without one the objective is the hard loss alone.
///
/// `stage` is 1-based and selects the shuffle stream.
pub fn train_stage<M, D>(
    student: &mut M,
    teacher: Option<&TeacherHandle<M>>,
    data: &D,
    cfg: &StageConfig,
    stage: usize,
) -> Result<StageHistory>
where
    M: CorrectionModel,
    D: StageData + ?Sized,
{
    cfg.validate()?;
    if let Some(t) = teacher {
        if t.model().vocab_size() != student.vocab_size() || t.model().params().len() != student.params().len() {
            return Err(Error::ShapeMismatch("teacher and student configurations differ".into()));
        }
    }
    let n = data.train_len();
    if n == 0 {
        return Err(Error::EmptyInput("training split"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.shuffle_seed);
    rng.set_stream(stage as u64);
    let mut optimizer = Optimizer::new(cfg.optimizer, student.params().len());
    let mut order: Vec<usize> = (0..n).collect();
    let mut epochs = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut hard_sum, mut soft_sum, mut tokens) = (0.0, 0.0, 0usize);
        for (batch, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let sentences: Vec<&ParallelSentence> = chunk.iter().map(|&i| data.train_sentence(i)).collect();
            let inputs: Vec<&[u32]> = sentences.iter().map(|s| s.source()).collect();
            let targets: Vec<u32> = sentences.iter().flat_map(|s| s.target().iter().copied()).collect();
            let non_finite = |what| Error::NonFinite {
                what,
                stage,
                epoch: epoch + 1,
                batch: batch + 1,
            };

            let (probs, trace) = student.forward_traced(&inputs)?;
            let hard = hard_loss(&probs, &targets)?;
            let (soft_value, dlogits) = match teacher {
                Some(t) => {
                    let teacher_probs = t.model().forward_batch(&inputs)?;
                    let soft = distill_loss(&probs, &teacher_probs)?;
                    let d = combined_dlogits(&hard.dlogits, &soft.dlogits, cfg.lambda)?;
                    (soft.loss, d)
                }
                None => (0.0, hard.dlogits),
            };
            if !hard.loss.is_finite() || !soft_value.is_finite() {
                return Err(non_finite("loss"));
            }
            let grads = student.backward(&trace, &dlogits)?;
            optimizer
                .step(student.params_mut(), &grads, cfg.learning_rate)
                .map_err(|e| match e {
                    Error::NonFiniteGradient { .. } => non_finite("gradient"),
                    e => e,
                })?;

            let count = targets.len();
            hard_sum += hard.loss * count as f64;
            soft_sum += soft_value * count as f64;
            tokens += count;
        }
        let lambda = if teacher.is_some() { cfg.lambda } else { 0.0 };
        epochs.push(LossBreakdown::new(hard_sum / tokens as f64, soft_sum / tokens as f64, lambda)?);
    }

    if let Some(t) = teacher {
        t.verify(stage)?;
    }
    Ok(StageHistory {
        stage,
        domain: data.name().to_string(),
        epochs,
        checkpoint: None,
    })
}
