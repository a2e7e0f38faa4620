use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Real;

/// Update rule applied to the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerKind {
    Adam { beta1: f64, beta2: f64, eps: f64 },
    /// `p -= lr * g`.
    Plain,
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Optimizer state. A fresh optimizer is created for every stage.
#[derive(Debug, Clone)]
pub struct Optimizer<F> {
    kind: OptimizerKind,
    first: Vec<F>,
    second: Vec<F>,
    steps: i32,
}

impl<F: Real> Optimizer<F> {
    pub fn new(kind: OptimizerKind, n_params: usize) -> Self {
        let n = match kind {
            OptimizerKind::Adam { .. } => n_params,
            OptimizerKind::Plain => 0,
        };
        Self {
            kind,
            first: vec![F::zero(); n],
            second: vec![F::zero(); n],
            steps: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.steps
    }

    /// Applies one update. Fails without touching `params` if any gradient
    /// entry is non-finite.
    pub fn step(&mut self, params: &mut [F], grads: &[F], learning_rate: f64) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameters vs {} gradients",
                params.len(),
                grads.len()
            )));
        }
        if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { index });
        }
        self.steps += 1;
        let lr = F::of(learning_rate);
        match self.kind {
            OptimizerKind::Plain => {
                for (p, &g) in params.iter_mut().zip(grads) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                if self.first.len() != params.len() {
                    return Err(Error::ShapeMismatch("optimizer state size".into()));
                }
                let (b1, b2, eps) = (F::of(beta1), F::of(beta2), F::of(eps));
                let c1 = F::of(1.0 - beta1.powi(self.steps));
                let c2 = F::of(1.0 - beta2.powi(self.steps));
                let (one_b1, one_b2) = (F::one() - b1, F::one() - b2);
                for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(&mut self.first).zip(&mut self.second) {
                    *m = b1 * *m + one_b1 * g;
                    *v = b2 * *v + one_b2 * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}

/// One update of `params` in place.
pub fn optimizer_step<F: Real>(
    params: &mut [F],
    grads: &[F],
    learning_rate: f64,
    state: &mut Optimizer<F>,
) -> Result<()> {
    state.step(params, grads, learning_rate)
}
