use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::stage::{train_stage, StageConfig, StageData, StageHistory, TeacherHandle};
use crate::error::{Error, Result};
use crate::model::CorrectionModel;

/// Student and bookkeeping after some prefix of the stage sequence. Cloning
/// a state lets several runs share an identical prefix.
#[derive(Debug, Clone)]
pub struct SequenceState<M> {
    pub student: M,
    pub histories: Vec<StageHistory>,
    pub teachers: Vec<Option<TeacherRecord>>,
}

impl<M> SequenceState<M> {
    pub fn new(initial: M) -> Self {
        Self {
            student: initial,
            histories: Vec::new(),
            teachers: Vec::new(),
        }
    }

    /// Number of completed stages.
    pub fn completed(&self) -> usize {
        self.histories.len()
    }
}

/// Checksums of a stage's teacher before and after the stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeacherRecord {
    pub checksum_before: String,
    pub checksum_after: String,
}

/// What the per-stage callback sees.
pub struct StageReport<'a, M> {
    pub stage: usize,
    pub domain: &'a str,
    pub student: &'a M,
    pub history: &'a StageHistory,
    pub teacher: Option<&'a TeacherRecord>,
}

pub fn checkpoint_name(stage: usize, domain: &str) -> String {
    format!("stage_{stage}_{domain}.ckpt")
}

/// Trains over `domains` in order from a fresh student. Stage 1 has no
/// teacher; stage `k >= 2` freezes a copy of the stage `k-1` student as
/// its teacher. Stage `k` reads only `domains[k-1]`.
///
/// `configs` holds one entry per domain. When `checkpoint_dir` is given a
/// checkpoint is written after every stage. `on_stage` runs after each
/// stage (and its checkpoint).
pub fn train_sequence<M, D>(
    initial: M,
    domains: &[D],
    configs: &[StageConfig],
    checkpoint_dir: Option<&Path>,
    on_stage: impl FnMut(StageReport<'_, M>) -> Result<()>,
) -> Result<SequenceState<M>>
where
    M: CorrectionModel,
    D: StageData,
{
    train_sequence_from(SequenceState::new(initial), domains, configs, checkpoint_dir, on_stage)
}

/// Continues a sequence from a completed prefix.
pub fn train_sequence_from<M, D>(
    mut state: SequenceState<M>,
    domains: &[D],
    configs: &[StageConfig],
    checkpoint_dir: Option<&Path>,
    mut on_stage: impl FnMut(StageReport<'_, M>) -> Result<()>,
) -> Result<SequenceState<M>>
where
    M: CorrectionModel,
    D: StageData,
{
    if domains.is_empty() {
        return Err(Error::EmptyInput("domain sequence"));
    }
    if configs.len() != domains.len() {
        return Err(Error::InvalidStageConfig(format!(
            "{} stage configs for {} domains",
            configs.len(),
            domains.len()
        )));
    }
    if state.completed() > domains.len() {
        return Err(Error::InvalidStageConfig("resumed state is past the last stage".into()));
    }
    for index in state.completed()..domains.len() {
        let stage = index + 1;
        let data = &domains[index];
        check_vocabulary(&state.student, data).map_err(|e| e.in_stage(stage, data.name()))?;
        let teacher = (stage > 1).then(|| TeacherHandle::freeze(&state.student));
        let mut history = train_stage(&mut state.student, teacher.as_ref(), data, &configs[index], stage)
            .map_err(|e| e.in_stage(stage, data.name()))?;
        let record = teacher.map(|t| TeacherRecord {
            checksum_before: t.checksum().to_string(),
            checksum_after: t.model().checksum(),
        });
        if let Some(dir) = checkpoint_dir {
            history.checkpoint = Some(write_stage_checkpoint(dir, stage, data.name(), &state.student)?);
        }
        state.histories.push(history);
        state.teachers.push(record);
        on_stage(StageReport {
            stage,
            domain: data.name(),
            student: &state.student,
            history: state.histories.last().unwrap(),
            teacher: state.teachers.last().unwrap().as_ref(),
        })?;
    }
    Ok(state)
}

fn write_stage_checkpoint<M: CorrectionModel>(dir: &Path, stage: usize, domain: &str, model: &M) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(checkpoint_name(stage, domain));
    fs::write(&path, model.checkpoint_bytes()).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn check_vocabulary<M: CorrectionModel, D: StageData>(model: &M, data: &D) -> Result<()> {
    let v = model.vocab_size();
    for i in 0..data.train_len() {
        let s = data.train_sentence(i);
        if let Some(&id) = s.source().iter().chain(s.target()).find(|&&id| id as usize >= v) {
            return Err(Error::VocabularyMismatch(format!(
                "domain `{}` uses id {id} but the model vocabulary has {v} entries",
                data.name()
            )));
        }
    }
    Ok(())
}
