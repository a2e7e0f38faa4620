use std::ops::Range;

use ndarray::{ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use super::real::Real;
use crate::error::{Error, Result};

/// The tensors of a window tagger, in declaration (and storage) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorKind {
    /// `V × E`; row 0 is the PAD embedding.
    Embedding,
    /// `(2w+1)E × H`.
    HiddenWeight,
    /// `H`.
    HiddenBias,
    /// `H × V`.
    OutputWeight,
    /// `V`.
    OutputBias,
}

impl TensorKind {
    pub const ALL: [TensorKind; 5] = [
        TensorKind::Embedding,
        TensorKind::HiddenWeight,
        TensorKind::HiddenBias,
        TensorKind::OutputWeight,
        TensorKind::OutputBias,
    ];

    /// `(rows, cols)`; vectors are a single row.
    pub fn shape(self, cfg: &ModelConfig) -> (usize, usize) {
        match self {
            TensorKind::Embedding => (cfg.vocab_size, cfg.embed_dim),
            TensorKind::HiddenWeight => (cfg.input_dim(), cfg.hidden_dim),
            TensorKind::HiddenBias => (1, cfg.hidden_dim),
            TensorKind::OutputWeight => (cfg.hidden_dim, cfg.vocab_size),
            TensorKind::OutputBias => (1, cfg.vocab_size),
        }
    }

    pub fn len(self, cfg: &ModelConfig) -> usize {
        let (r, c) = self.shape(cfg);
        r * c
    }

    pub fn name(self) -> &'static str {
        match self {
            TensorKind::Embedding => "embedding",
            TensorKind::HiddenWeight => "W1",
            TensorKind::HiddenBias => "b1",
            TensorKind::OutputWeight => "W2",
            TensorKind::OutputBias => "b2",
        }
    }
}

/// All tagger weights in one flat row-major buffer, tensors laid out in
/// [`TensorKind::ALL`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters<F> {
    config: ModelConfig,
    data: Vec<F>,
}

/// Gradients share the parameter layout.
pub type ParamGradients<F> = Parameters<F>;

impl<F: Real> Parameters<F> {
    pub fn zeros(config: ModelConfig) -> Self {
        let n = TensorKind::ALL.iter().map(|k| k.len(&config)).sum();
        Self {
            config,
            data: vec![F::zero(); n],
        }
    }

    pub fn from_flat(config: ModelConfig, data: Vec<F>) -> Result<Self> {
        let expected = Self::zeros_len(&config);
        if data.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "flat parameter buffer has {} entries, config needs {expected}",
                data.len()
            )));
        }
        Ok(Self { config, data })
    }

    fn zeros_len(config: &ModelConfig) -> usize {
        TensorKind::ALL.iter().map(|k| k.len(config)).sum()
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [F] {
        &mut self.data
    }

    pub fn into_flat(self) -> Vec<F> {
        self.data
    }

    pub fn range(&self, kind: TensorKind) -> Range<usize> {
        let mut start = 0;
        for k in TensorKind::ALL {
            let len = k.len(&self.config);
            if k == kind {
                return start..start + len;
            }
            start += len;
        }
        unreachable!()
    }

    pub fn tensor(&self, kind: TensorKind) -> &[F] {
        &self.data[self.range(kind)]
    }

    pub fn tensor_mut(&mut self, kind: TensorKind) -> &mut [F] {
        let r = self.range(kind);
        &mut self.data[r]
    }

    pub fn matrix(&self, kind: TensorKind) -> ArrayView2<'_, F> {
        let shape = kind.shape(&self.config);
        ArrayView2::from_shape(shape, self.tensor(kind)).expect("layout matches shape")
    }

    pub fn matrix_mut(&mut self, kind: TensorKind) -> ArrayViewMut2<'_, F> {
        let shape = kind.shape(&self.config);
        ArrayViewMut2::from_shape(shape, self.tensor_mut(kind)).expect("layout matches shape")
    }

    pub fn vector(&self, kind: TensorKind) -> ArrayView1<'_, F> {
        ArrayView1::from(self.tensor(kind))
    }

    pub fn vector_mut(&mut self, kind: TensorKind) -> ArrayViewMut1<'_, F> {
        ArrayViewMut1::from(self.tensor_mut(kind))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Elementwise `self += other`.
    pub fn accumulate(&mut self, other: &Self) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Converts to another precision.
    pub fn cast<G: Real>(&self) -> Parameters<G> {
        Parameters {
            config: self.config,
            data: self.data.iter().map(|x| G::of(x.as_f64())).collect(),
        }
    }
}

/// Deterministic initialization: every matrix uniform in `[-s, s]` with
/// `s = sqrt(6 / (fan_in + fan_out))`, biases zero. Values are drawn in
/// `f64` from ChaCha8 seeded with `seed`, in tensor declaration order.
pub fn init_params<F: Real>(config: ModelConfig, seed: u64) -> Result<Parameters<F>> {
    config.validate()?;
    let mut params = Parameters::zeros(config);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for kind in [TensorKind::Embedding, TensorKind::HiddenWeight, TensorKind::OutputWeight] {
        let (fan_in, fan_out) = kind.shape(&config);
        let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for w in params.tensor_mut(kind) {
            *w = F::of(rng.random_range(-s..=s));
        }
    }
    Ok(params)
}
