mod common;

use std::cell::Cell;

use common::*;
use mkt_core::corpus::{DomainCorpus, ParallelSentence};
use mkt_core::model::CorrectionModel;
use mkt_core::training::{
    combined_dlogits, distill_loss, hard_loss, train_sequence, OptimizerKind, StageData, TeacherHandle,
};
use mkt_core::{train_stage, Error, ModelConfig, StageConfig, WindowTagger};

#[test]
fn analytic_gradient_matches_finite_differences() {
    for seed in 0..5u64 {
        let student = WindowTagger::<f64>::new(grad_check_config(), seed).unwrap();
        let teacher = WindowTagger::<f64>::new(grad_check_config(), seed + 100).unwrap();
        let (inputs, targets) = grad_check_batch(seed);
        let inputs: Vec<&[u32]> = inputs.iter().map(Vec::as_slice).collect();
        let teacher_probs = teacher.forward_batch(&inputs).unwrap();
        for lambda in [0.0, 0.01, 0.5, 1.0] {
            let (probs, trace) = student.forward_traced(&inputs).unwrap();
            let hard = hard_loss(&probs, &targets).unwrap();
            let soft = distill_loss(&probs, &teacher_probs).unwrap();
            let d = combined_dlogits(&hard.dlogits, &soft.dlogits, lambda).unwrap();
            let analytic = student.backward(&trace, &d).unwrap();
            let numeric =
                finite_difference_gradient(&student, &teacher_probs.probs, &inputs, &targets, lambda, 1e-4);
            let err = max_relative_error(&analytic, &numeric, 1e-12);
            assert!(err < 1e-4, "seed {seed} lambda {lambda}: max relative error {err}");
        }
    }
}

#[test]
fn lambda_zero_with_teacher_equals_plain_fine_tuning() {
    let (corpus, vocab) = toy_domain("d", 50, 3);
    let start = WindowTagger::<f32>::new(ModelConfig::new(vocab.size()), 1).unwrap();
    let cfg = StageConfig {
        epochs: 2,
        batch_size: 8,
        lambda: 0.0,
        ..Default::default()
    };
    let teacher = TeacherHandle::freeze(&WindowTagger::<f32>::new(ModelConfig::new(vocab.size()), 2).unwrap());
    let mut with_teacher = start.clone();
    let mut alone = start.clone();
    let a = train_stage(&mut with_teacher, Some(&teacher), &corpus, &cfg, 2).unwrap();
    let b = train_stage(&mut alone, None, &corpus, &cfg, 2).unwrap();
    assert!(with_teacher.params().iter().zip(alone.params()).all(|(x, y)| x.to_bits() == y.to_bits()));
    let hard = |h: &mkt_core::StageHistory| h.epochs.iter().map(|e| e.l_hard).collect::<Vec<_>>();
    assert_eq!(hard(&a), hard(&b));
}

#[test]
fn lambda_one_from_the_teacher_is_a_fixed_point() {
    let (corpus, vocab) = toy_domain("d", 40, 4);
    let mut student = WindowTagger::<f32>::new(ModelConfig::new(vocab.size()), 5).unwrap();
    let teacher = TeacherHandle::freeze(&student);
    let before = student.params().to_vec();
    let cfg = StageConfig {
        epochs: 1,
        batch_size: 8,
        lambda: 1.0,
        optimizer: OptimizerKind::Plain,
        ..Default::default()
    };
    let history = train_stage(&mut student, Some(&teacher), &corpus, &cfg, 2).unwrap();
    assert!(student.params().iter().zip(&before).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(history.epochs.len(), 1);
}

#[test]
fn teachers_stay_frozen_across_a_sequence() {
    let domains: Vec<DomainCorpus> = (0..4).map(|i| toy_domain(&format!("d{i}"), 30, i).0).collect();
    let (_, vocab) = toy_domain("d0", 30, 0);
    let model = WindowTagger::<f32>::new(ModelConfig::new(vocab.size()), 0).unwrap();
    let cfgs = vec![
        StageConfig {
            epochs: 2,
            batch_size: 8,
            lambda: 0.3,
            ..Default::default()
        };
        4
    ];
    let mut seen = Vec::new();
    let state = train_sequence(model, &domains, &cfgs, None, |r| {
        seen.push((r.stage, r.domain.to_string(), r.teacher.cloned()));
        Ok(())
    })
    .unwrap();
    assert_eq!(seen.len(), 4);
    assert!(seen[0].2.is_none());
    for (stage, _, record) in &seen[1..] {
        let record = record.as_ref().unwrap_or_else(|| panic!("stage {stage} has no teacher"));
        assert_eq!(record.checksum_before, record.checksum_after);
    }
    assert_eq!(state.histories.iter().map(|h| h.stage).collect::<Vec<_>>(), [1, 2, 3, 4]);
}

/// Counts every training-sentence access.
struct Counted {
    inner: DomainCorpus,
    reads: Cell<usize>,
}

impl StageData for Counted {
    fn name(&self) -> &str {
        &self.inner.name
    }

    fn train_len(&self) -> usize {
        self.inner.train.len()
    }

    fn train_sentence(&self, index: usize) -> &ParallelSentence {
        self.reads.set(self.reads.get() + 1);
        &self.inner.train[index]
    }
}

#[test]
fn stage_k_reads_only_domain_k() {
    let domains: Vec<Counted> = (0..3)
        .map(|i| Counted {
            inner: toy_domain(&format!("d{i}"), 25, 10 + i).0,
            reads: Cell::new(0),
        })
        .collect();
    let (_, vocab) = toy_domain("d0", 25, 10);
    let model = WindowTagger::<f32>::new(ModelConfig::new(vocab.size()), 0).unwrap();
    let cfgs = vec![
        StageConfig {
            epochs: 2,
            batch_size: 8,
            ..Default::default()
        };
        3
    ];
    let mut snapshots = Vec::new();
    train_sequence(model, &domains, &cfgs, None, |_| {
        snapshots.push(domains.iter().map(|d| d.reads.get()).collect::<Vec<_>>());
        Ok(())
    })
    .unwrap();
    let mut previous = vec![0; 3];
    for (k, now) in snapshots.iter().enumerate() {
        for j in 0..3 {
            if j == k {
                assert!(now[j] > previous[j], "stage {} never read its own domain", k + 1);
            } else {
                assert_eq!(now[j], previous[j], "stage {} read domain {j}", k + 1);
            }
        }
        previous = now.clone();
    }
}

#[test]
fn memorization_loss_falls_every_epoch() {
    let (corpus, vocab) = toy_domain("tiny", 10, 21);
    let mut model = WindowTagger::<f32>::new(ModelConfig::new(vocab.size()), 3).unwrap();
    let cfg = StageConfig {
        epochs: 5,
        batch_size: 4,
        ..Default::default()
    };
    let history = train_stage(&mut model, None, &corpus, &cfg, 1).unwrap();
    let losses: Vec<f64> = history.epochs.iter().map(|e| e.l_hard).collect();
    assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
    assert!(history.epochs.iter().all(|e| e.l_soft == 0.0 && e.combined == e.l_hard));
}

#[test]
fn single_domain_sequence_has_no_teacher() {
    let (corpus, vocab) = toy_domain("only", 20, 1);
    let model = WindowTagger::<f32>::new(ModelConfig::new(vocab.size()), 0).unwrap();
    let cfg = StageConfig {
        epochs: 1,
        ..Default::default()
    };
    let state = train_sequence(model, &[corpus], &[cfg], None, |_| Ok(())).unwrap();
    assert_eq!(state.completed(), 1);
    assert_eq!(state.teachers, [None]);
}

#[test]
fn sequence_errors_carry_stage_context() {
    let (corpus, vocab) = toy_domain("d", 20, 1);
    let small = WindowTagger::<f32>::new(ModelConfig::new(3), 0).unwrap();
    let cfg = StageConfig::default();
    let err = train_sequence(small, std::slice::from_ref(&corpus), &[cfg], None, |_| Ok(())).unwrap_err();
    assert!(matches!(&err, Error::Stage { stage: 1, source, .. } if matches!(**source, Error::VocabularyMismatch(_))));

    let model = WindowTagger::<f32>::new(ModelConfig::new(vocab.size()), 0).unwrap();
    let err = train_sequence(model.clone(), std::slice::from_ref(&corpus), &[cfg, cfg], None, |_| Ok(())).unwrap_err();
    assert!(matches!(err, Error::InvalidStageConfig(_)));

    let mut broken = model;
    broken.params_mut()[0] = f32::NAN;
    let err = train_sequence(broken, &[corpus], &[cfg], None, |_| Ok(())).unwrap_err();
    assert!(err.to_string().contains("stage 1"), "{err}");
    assert!(err.to_string().contains("non-finite"), "{err}");
}

#[test]
fn checkpoints_are_written_per_stage() {
    let dir = tempfile::tempdir().unwrap();
    let domains: Vec<DomainCorpus> = (0..2).map(|i| toy_domain(&format!("d{i}"), 20, i).0).collect();
    let (_, vocab) = toy_domain("d0", 20, 0);
    let model = WindowTagger::<f32>::new(ModelConfig::new(vocab.size()), 0).unwrap();
    let cfg = StageConfig {
        epochs: 1,
        ..Default::default()
    };
    let state = train_sequence(model, &domains, &[cfg, cfg], Some(dir.path()), |_| Ok(())).unwrap();
    let last = state.histories[1].checkpoint.as_ref().unwrap();
    assert!(last.ends_with("stage_2_d1.ckpt"));
    let restored = mkt_core::model::read_checkpoint(last).unwrap();
    assert_eq!(restored.params(), state.student.params());
}
