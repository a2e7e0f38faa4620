use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, Axis, Zip};

use super::checkpoint;
use super::config::ModelConfig;
use super::params::{init_params, ParamGradients, Parameters, TensorKind};
use super::real::Real;
use super::{CorrectionModel, PositionDistributions};
use crate::corpus::PAD;
use crate::error::{Error, Result};

/// Cached activations of one batched forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace<F> {
    /// `N × (2w+1)` ids fed to each window slot, PAD beyond sentence edges.
    pub window_ids: Vec<u32>,
    /// `N × (2w+1)E` concatenated window embeddings.
    pub inputs: Array2<F>,
    /// `N × H` hidden pre-activations.
    pub pre_activation: Array2<F>,
    /// `N × H` ReLU outputs.
    pub hidden: Array2<F>,
    /// `N × V`.
    pub logits: Array2<F>,
}

impl<F> ForwardTrace<F> {
    pub fn positions(&self) -> usize {
        self.logits.nrows()
    }
}

/// Embeds a `2w+1` character window around each position, applies one ReLU
/// hidden layer, and projects to vocabulary logits.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTagger<F> {
    params: Parameters<F>,
}

impl<F: Real> WindowTagger<F> {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        Ok(Self {
            params: init_params(config, seed)?,
        })
    }

    pub fn from_params(params: Parameters<F>) -> Result<Self> {
        params.config().validate()?;
        Ok(Self { params })
    }

    pub fn config(&self) -> &ModelConfig {
        self.params.config()
    }

    pub fn parameters(&self) -> &Parameters<F> {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut Parameters<F> {
        &mut self.params
    }

    pub fn into_parameters(self) -> Parameters<F> {
        self.params
    }

    /// Deep copy; the two models share no storage afterwards.
    pub fn clone_params(&self) -> Self {
        self.clone()
    }

    fn window_ids(&self, inputs: &[&[u32]]) -> Result<Vec<u32>> {
        let cfg = self.config();
        let w = cfg.window as isize;
        let mut ids = Vec::with_capacity(inputs.iter().map(|x| x.len()).sum::<usize>() * cfg.slots());
        for x in inputs {
            if x.is_empty() {
                return Err(Error::EmptyInput("input sentence"));
            }
            if let Some(&id) = x.iter().find(|&&id| id as usize >= cfg.vocab_size) {
                return Err(Error::TokenOutOfRange {
                    id,
                    vocab_size: cfg.vocab_size,
                });
            }
            let n = x.len() as isize;
            for t in 0..n {
                for j in t - w..=t + w {
                    ids.push(if (0..n).contains(&j) { x[j as usize] } else { PAD });
                }
            }
        }
        Ok(ids)
    }

    fn run(&self, inputs: &[&[u32]]) -> Result<(PositionDistributions<F>, ForwardTrace<F>)> {
        if inputs.is_empty() {
            return Err(Error::EmptyInput("batch"));
        }
        let cfg = *self.config();
        let window_ids = self.window_ids(inputs)?;
        let n = window_ids.len() / cfg.slots();
        let e = cfg.embed_dim;

        let emb = self.params.tensor(TensorKind::Embedding);
        let mut x = Array2::<F>::zeros((n, cfg.input_dim()));
        for (mut row, ids) in x.rows_mut().into_iter().zip(window_ids.chunks_exact(cfg.slots())) {
            let row = row.as_slice_mut().expect("standard layout");
            for (slot, &id) in ids.iter().enumerate() {
                let src = &emb[id as usize * e..(id as usize + 1) * e];
                row[slot * e..(slot + 1) * e].copy_from_slice(src);
            }
        }

        let mut pre = Array2::<F>::zeros((n, cfg.hidden_dim));
        pre.assign(&self.params.vector(TensorKind::HiddenBias).broadcast((n, cfg.hidden_dim)).unwrap());
        general_mat_mul(F::one(), &x, &self.params.matrix(TensorKind::HiddenWeight), F::one(), &mut pre);
        let hidden = pre.mapv(|z| if z > F::zero() { z } else { F::zero() });

        let mut logits = Array2::<F>::zeros((n, cfg.vocab_size));
        logits.assign(&self.params.vector(TensorKind::OutputBias).broadcast((n, cfg.vocab_size)).unwrap());
        general_mat_mul(F::one(), &hidden, &self.params.matrix(TensorKind::OutputWeight), F::one(), &mut logits);

        let dist = PositionDistributions::from_logits(&logits);
        let trace = ForwardTrace {
            window_ids,
            inputs: x,
            pre_activation: pre,
            hidden,
            logits,
        };
        Ok((dist, trace))
    }

    /// Exact gradients of a loss with respect to every tensor, given the loss
    /// gradient at the logits of the traced batch.
    pub fn backward_tensors(&self, trace: &ForwardTrace<F>, dlogits: &Array2<F>) -> Result<ParamGradients<F>> {
        let cfg = *self.config();
        let n = trace.positions();
        if dlogits.dim() != (n, cfg.vocab_size) || trace.inputs.dim() != (n, cfg.input_dim()) {
            return Err(Error::ShapeMismatch(format!(
                "dlogits {:?} against trace with {n} positions and vocabulary {}",
                dlogits.dim(),
                cfg.vocab_size
            )));
        }
        let mut grads = ParamGradients::zeros(cfg);

        general_mat_mul(F::one(), &trace.hidden.t(), dlogits, F::zero(), &mut grads.matrix_mut(TensorKind::OutputWeight));
        grads.vector_mut(TensorKind::OutputBias).assign(&dlogits.sum_axis(Axis(0)));

        let mut dpre = dlogits.dot(&self.params.matrix(TensorKind::OutputWeight).t());
        Zip::from(&mut dpre).and(&trace.pre_activation).for_each(|d, &z| {
            if z <= F::zero() {
                *d = F::zero();
            }
        });

        general_mat_mul(F::one(), &trace.inputs.t(), &dpre, F::zero(), &mut grads.matrix_mut(TensorKind::HiddenWeight));
        grads.vector_mut(TensorKind::HiddenBias).assign(&dpre.sum_axis(Axis(0)));

        let dx = dpre.dot(&self.params.matrix(TensorKind::HiddenWeight).t());
        let e = cfg.embed_dim;
        let demb = grads.tensor_mut(TensorKind::Embedding);
        for (row, ids) in dx.rows().into_iter().zip(trace.window_ids.chunks_exact(cfg.slots())) {
            let row = row.as_slice().expect("standard layout");
            for (slot, &id) in ids.iter().enumerate() {
                let dst = &mut demb[id as usize * e..(id as usize + 1) * e];
                for (d, &g) in dst.iter_mut().zip(&row[slot * e..(slot + 1) * e]) {
                    *d += g;
                }
            }
        }
        Ok(grads)
    }
}

impl<F: Real> CorrectionModel for WindowTagger<F> {
    type Scalar = F;
    type Trace = ForwardTrace<F>;

    fn vocab_size(&self) -> usize {
        self.config().vocab_size
    }

    fn forward_batch(&self, inputs: &[&[u32]]) -> Result<PositionDistributions<F>> {
        Ok(self.run(inputs)?.0)
    }

    fn forward_traced(&self, inputs: &[&[u32]]) -> Result<(PositionDistributions<F>, ForwardTrace<F>)> {
        self.run(inputs)
    }

    fn backward(&self, trace: &ForwardTrace<F>, dlogits: &Array2<F>) -> Result<Vec<F>> {
        Ok(self.backward_tensors(trace, dlogits)?.into_flat())
    }

    fn params(&self) -> &[F] {
        self.params.as_slice()
    }

    fn params_mut(&mut self) -> &mut [F] {
        self.params.as_mut_slice()
    }

    fn checkpoint_bytes(&self) -> Vec<u8> {
        checkpoint::encode(&self.params.cast::<f32>())
    }
}
