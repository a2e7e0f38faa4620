//! Per-position character correction models.
//!
//! Training code only sees the [`CorrectionModel`] contract: batched forward
//! passes producing one distribution over the vocabulary per input position,
//! a backward pass from logit gradients to a flat parameter gradient, and
//! flat read/write access to the parameters. [`WindowTagger`] is the
//! reference implementation.

mod checkpoint;
mod config;
mod params;
mod real;
mod tagger;

use ndarray::Array2;
use sha2::{Digest, Sha256};

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use config::ModelConfig;
pub use params::{init_params, ParamGradients, Parameters, TensorKind};
pub use real::Real;
pub use tagger::{ForwardTrace, WindowTagger};

use crate::error::Result;

/// One probability distribution over the vocabulary per input position.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDistributions<F> {
    /// `n × V`; each row sums to one.
    pub probs: Array2<F>,
    /// Natural log of `probs`, computed from the logits so it stays finite
    /// when a probability underflows.
    pub log_probs: Array2<F>,
}

impl<F: Real> PositionDistributions<F> {
    /// Row-wise softmax with the row maximum subtracted before exponentiation.
    pub fn from_logits(logits: &Array2<F>) -> Self {
        let mut probs = logits.clone();
        let mut log_probs = logits.clone();
        for (mut p, mut lp) in probs.rows_mut().into_iter().zip(log_probs.rows_mut()) {
            let max = p.iter().copied().fold(F::neg_infinity(), F::max);
            let mut sum = F::zero();
            for v in p.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            let log_sum = sum.ln();
            for (v, l) in p.iter_mut().zip(lp.iter_mut()) {
                *v = *v / sum;
                *l = *l - max - log_sum;
            }
        }
        Self { probs, log_probs }
    }

    pub fn positions(&self) -> usize {
        self.probs.nrows()
    }

    pub fn vocab_size(&self) -> usize {
        self.probs.ncols()
    }

    /// Per-row argmax; ties go to the lowest id.
    pub fn argmax(&self) -> Vec<u32> {
        self.probs
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for (i, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = i;
                    }
                }
                best as u32
            })
            .collect()
    }
}

/// The contract the training loop is written against.
pub trait CorrectionModel: Clone {
    type Scalar: Real;
    type Trace;

    fn vocab_size(&self) -> usize;

    /// Distributions for every position of every input, rows concatenated in
    /// input order.
    fn forward_batch(&self, inputs: &[&[u32]]) -> Result<PositionDistributions<Self::Scalar>>;

    fn forward_traced(
        &self,
        inputs: &[&[u32]],
    ) -> Result<(PositionDistributions<Self::Scalar>, Self::Trace)>;

    /// Gradient of a loss with respect to the flat parameters, given the
    /// loss gradient with respect to the logits of a traced batch.
    fn backward(&self, trace: &Self::Trace, dlogits: &Array2<Self::Scalar>) -> Result<Vec<Self::Scalar>>;

    fn params(&self) -> &[Self::Scalar];

    fn params_mut(&mut self) -> &mut [Self::Scalar];

    /// Serialized parameters in the model's on-disk checkpoint format.
    fn checkpoint_bytes(&self) -> Vec<u8>;

    fn forward(&self, input: &[u32]) -> Result<PositionDistributions<Self::Scalar>> {
        self.forward_batch(&[input])
    }

    fn predict(&self, input: &[u32]) -> Result<Vec<u32>> {
        Ok(self.forward(input)?.argmax())
    }

    /// Hex SHA-256 of the parameters' little-endian bytes.
    fn checksum(&self) -> String {
        param_checksum(self.params())
    }
}

pub fn param_checksum<F: Real>(params: &[F]) -> String {
    let mut bytes = Vec::with_capacity(params.len() * 8);
    for &p in params {
        p.extend_le_bytes(&mut bytes);
    }
    hex::encode(Sha256::digest(&bytes))
}
