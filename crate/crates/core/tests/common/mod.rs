//! Helpers shared by the integration test targets. The loss and gradient
//! oracles here recompute everything from the model's output probabilities
//! without going through the library's loss functions.

#![allow(dead_code)]

use mkt_core::corpus::{synthesize_domain, vocabulary_for_specs, ConfusionSet, DomainCorpus, DomainSpec};
use mkt_core::model::CorrectionModel;
use mkt_core::{ModelConfig, Vocabulary, WindowTagger};
use ndarray::Array2;

/// A small synthetic domain over the letters a..h.
pub fn toy_domain(name: &str, n_train: usize, seed: u64) -> (DomainCorpus, Vocabulary) {
    let mut confusion = ConfusionSet::new();
    let letters: Vec<char> = "abcdefgh".chars().collect();
    for (i, &c) in letters.iter().enumerate() {
        confusion.add(c, letters[(i + 3) % letters.len()]);
    }
    let spec = DomainSpec {
        name: name.into(),
        shared_lexicon: vec!["abc".into(), "de".into(), "fgh".into(), "ba".into()],
        domain_lexicon: vec!["hgf".into(), "cab".into(), "ed".into()],
        confusion,
        conflict_words: vec![],
        error_rate: 0.2,
        n_train,
        n_test: 20,
        sentence_len_range: (2, 4),
        seed,
    };
    let vocab = vocabulary_for_specs(std::slice::from_ref(&spec));
    (synthesize_domain(&spec, &vocab).unwrap(), vocab)
}

pub fn grad_check_config() -> ModelConfig {
    ModelConfig {
        vocab_size: 7,
        embed_dim: 4,
        window: 1,
        hidden_dim: 5,
    }
}

/// Token-mean `-ln p[target]` computed directly from probabilities.
pub fn oracle_hard(p: &Array2<f64>, targets: &[u32]) -> f64 {
    let n = p.nrows() as f64;
    targets.iter().enumerate().map(|(i, &t)| -p[[i, t as usize]].ln()).sum::<f64>() / n
}

/// Token-mean `-sum q ln p` computed directly from probabilities.
pub fn oracle_soft(p: &Array2<f64>, q: &Array2<f64>) -> f64 {
    let n = p.nrows() as f64;
    p.iter().zip(q.iter()).map(|(&ps, &qt)| -qt * ps.ln()).sum::<f64>() / n
}

pub fn oracle_combined(
    student: &WindowTagger<f64>,
    teacher_probs: &Array2<f64>,
    inputs: &[&[u32]],
    targets: &[u32],
    lambda: f64,
) -> f64 {
    let p = student.forward_batch(inputs).unwrap().probs;
    lambda * oracle_soft(&p, teacher_probs) + (1.0 - lambda) * oracle_hard(&p, targets)
}

/// Central differences of the combined loss for every parameter.
pub fn finite_difference_gradient(
    student: &WindowTagger<f64>,
    teacher_probs: &Array2<f64>,
    inputs: &[&[u32]],
    targets: &[u32],
    lambda: f64,
    h: f64,
) -> Vec<f64> {
    let mut probe = student.clone();
    let n = probe.params().len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + h;
        let up = oracle_combined(&probe, teacher_probs, inputs, targets, lambda);
        probe.params_mut()[i] = orig - h;
        let down = oracle_combined(&probe, teacher_probs, inputs, targets, lambda);
        probe.params_mut()[i] = orig;
        out.push((up - down) / (2.0 * h));
    }
    out
}

/// Largest `|a - b| / max(|a|, |b|, floor)` over all entries.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Ids 2..V spread over three sentences so every embedding row is used.
pub fn grad_check_batch(seed: u64) -> (Vec<Vec<u32>>, Vec<u32>) {
    let v = grad_check_config().vocab_size as u64;
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (x >> 33) % v
    };
    let inputs: Vec<Vec<u32>> = [4usize, 3, 5]
        .iter()
        .map(|&len| (0..len).map(|_| (2 + next() % (v - 2)) as u32).collect())
        .collect();
    let positions: usize = inputs.iter().map(Vec::len).sum();
    let targets = (0..positions).map(|_| (2 + next() % (v - 2)) as u32).collect();
    (inputs, targets)
}
