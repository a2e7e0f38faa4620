use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PositionDistributions, Real};

/// A loss value (token mean, accumulated in f64) and its gradient with
/// respect to the logits.
#[derive(Debug, Clone)]
pub struct LossGrad<F> {
    pub loss: f64,
    pub dlogits: Array2<F>,
}

/// The three terms of the stage objective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub l_hard: f64,
    pub l_soft: f64,
    pub combined: f64,
}

impl LossBreakdown {
    pub fn new(l_hard: f64, l_soft: f64, lambda: f64) -> Result<Self> {
        Ok(Self {
            l_hard,
            l_soft,
            combined: combined_loss(l_hard, l_soft, lambda)?,
        })
    }
}

/// Cross-entropy against the ground-truth characters: the token mean of
/// `-log p(y_t)`, with logit gradient `(p - onehot(y_t)) / n`.
pub fn hard_loss<F: Real>(student: &PositionDistributions<F>, targets: &[u32]) -> Result<LossGrad<F>> {
    let n = student.positions();
    if n == 0 {
        return Err(Error::EmptyInput("hard loss positions"));
    }
    if targets.len() != n {
        return Err(Error::ShapeMismatch(format!("{} targets for {n} positions", targets.len())));
    }
    let v = student.vocab_size();
    if let Some(&id) = targets.iter().find(|&&y| y as usize >= v) {
        return Err(Error::TokenOutOfRange { id, vocab_size: v });
    }
    let scale = F::one() / F::of(n as f64);
    let mut dlogits = student.probs.mapv(|p| p * scale);
    let mut total = 0.0;
    for (t, &y) in targets.iter().enumerate() {
        total -= student.log_probs[[t, y as usize]].as_f64();
        dlogits[[t, y as usize]] = (student.probs[[t, y as usize]] - F::one()) * scale;
    }
    Ok(LossGrad {
        loss: total / n as f64,
        dlogits,
    })
}

/// Cross-entropy of the student against the teacher's output distribution:
/// the token mean of `-sum_v p_t(v) log p_s(v)`, with logit gradient
/// `(p_s - p_t) / n`.
pub fn distill_loss<F: Real>(
    student: &PositionDistributions<F>,
    teacher: &PositionDistributions<F>,
) -> Result<LossGrad<F>> {
    if student.probs.dim() != teacher.probs.dim() {
        return Err(Error::ShapeMismatch(format!(
            "student {:?} vs teacher {:?}",
            student.probs.dim(),
            teacher.probs.dim()
        )));
    }
    let n = student.positions();
    if n == 0 {
        return Err(Error::EmptyInput("distillation positions"));
    }
    let mut total = 0.0;
    Zip::from(&teacher.probs)
        .and(&student.log_probs)
        .for_each(|&pt, &ls| total -= pt.as_f64() * ls.as_f64());
    let scale = F::one() / F::of(n as f64);
    let dlogits = Zip::from(&student.probs)
        .and(&teacher.probs)
        .map_collect(|&ps, &pt| (ps - pt) * scale);
    Ok(LossGrad {
        loss: total / n as f64,
        dlogits,
    })
}

pub fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::LambdaOutOfRange(lambda))
    }
}

/// `lambda * l_soft + (1 - lambda) * l_hard`.
pub fn combined_loss(l_hard: f64, l_soft: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(lambda * l_soft + (1.0 - lambda) * l_hard)
}

/// Upstream gradient of the combined loss, weighted like the loss itself.
pub fn combined_dlogits<F: Real>(hard: &Array2<F>, soft: &Array2<F>, lambda: f64) -> Result<Array2<F>> {
    check_lambda(lambda)?;
    if hard.dim() != soft.dim() {
        return Err(Error::ShapeMismatch(format!("hard {:?} vs soft {:?}", hard.dim(), soft.dim())));
    }
    let (ws, wh) = (F::of(lambda), F::of(1.0 - lambda));
    Ok(Zip::from(hard).and(soft).map_collect(|&h, &s| ws * s + wh * h))
}
