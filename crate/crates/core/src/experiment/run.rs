use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{BenchmarkSource, ExperimentConfig, RunSnapshot, RUN_KIND};
use super::report::{write_forgetting_csv, write_losses_csv, write_metrics_csv};
use super::svg::emit_forgetting_svg;
use crate::corpus::{build_from_specs, load_corpus, scan_corpus_chars, DomainCorpus, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::{evaluate, forgetting_stats, ForgettingMatrix, ForgettingStats, MetricsReport};
use crate::model::{CorrectionModel, WindowTagger};
use crate::training::{checkpoint_name, train_sequence_from, SequenceState, StageHistory, TeacherRecord};

/// Domains of an experiment in training order, with their shared vocabulary.
#[derive(Debug, Clone)]
pub struct LoadedBenchmark {
    pub vocab: Vocabulary,
    pub domains: Vec<DomainCorpus>,
}

/// Everything a finished run produced. Only the artifacts are written to
/// disk; stage timings stay in memory so reruns are byte-identical.
#[derive(Debug, Clone)]
pub struct RunRecord {
    /// The resolved config, as stored in `run.json`.
    pub config: ExperimentConfig,
    pub histories: Vec<StageHistory>,
    pub teachers: Vec<Option<TeacherRecord>>,
    pub matrix: ForgettingMatrix,
    pub stats: ForgettingStats,
    pub stage_seconds: Vec<f64>,
    pub artifacts: Vec<PathBuf>,
}

/// Builds or loads the benchmark named by `cfg` and orders it for training.
pub fn load_benchmark(cfg: &ExperimentConfig) -> Result<LoadedBenchmark> {
    let (vocab, mut domains) = match &cfg.benchmark {
        BenchmarkSource::Default => {
            let b = crate::corpus::build_default_benchmark(cfg.master_seed)?;
            (b.vocab, b.domains)
        }
        BenchmarkSource::Design(design) => {
            let b = design.build(cfg.master_seed)?;
            (b.vocab, b.domains)
        }
        BenchmarkSource::Specs(specs) => {
            let b = build_from_specs(specs.clone())?;
            (b.vocab, b.domains)
        }
        BenchmarkSource::Paths(files) => {
            let mut scanned = Vocabulary::new();
            for f in files {
                scan_corpus_chars(&f.train, &mut scanned)?;
                scan_corpus_chars(&f.test, &mut scanned)?;
            }
            let mut chars = scanned.chars().to_vec();
            chars.sort_unstable();
            let vocab = Vocabulary::from_chars(chars);
            let mut domains = Vec::with_capacity(files.len());
            for f in files {
                let (train, _) = load_corpus(&f.train, Some(&vocab))?;
                let (test, _) = load_corpus(&f.test, Some(&vocab))?;
                domains.push(DomainCorpus::new(f.name.clone(), train, test));
            }
            (vocab, domains)
        }
    };
    let mut ordered = Vec::new();
    for name in cfg.resolved_order() {
        let i = domains
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| Error::UnknownDomain(name.clone()))?;
        ordered.push(domains.swap_remove(i));
    }
    Ok(LoadedBenchmark { vocab, domains: ordered })
}

/// Completed leading stages, with what a run needs to report them.
#[derive(Debug, Clone)]
pub(crate) struct Prefix {
    state: SequenceState<WindowTagger<f32>>,
    rows: Vec<Vec<MetricsReport>>,
    checkpoints: Vec<Vec<u8>>,
    seconds: Vec<f64>,
}

fn evaluate_row<M: CorrectionModel>(model: &M, domains: &[DomainCorpus]) -> Result<Vec<MetricsReport>> {
    domains.iter().map(|d| evaluate(model, &d.test)).collect()
}

/// Trains the first stage from a freshly initialized model. Stage 1 has no
/// teacher, so the result does not depend on lambda.
pub(crate) fn first_stage(cfg: &ExperimentConfig, bench: &LoadedBenchmark) -> Result<Prefix> {
    let model = WindowTagger::<f32>::new(cfg.model.with_vocab(bench.vocab.size()), cfg.master_seed)?;
    let configs = cfg.stage_configs();
    let mut rows = Vec::new();
    let mut checkpoints = Vec::new();
    let mut seconds = Vec::new();
    let started = Instant::now();
    let state = train_sequence_from(
        SequenceState::new(model),
        &bench.domains[..1],
        &configs[..1],
        None,
        |report| {
            seconds.push(started.elapsed().as_secs_f64());
            checkpoints.push(report.student.checkpoint_bytes());
            rows.push(evaluate_row(report.student, &bench.domains).map_err(|e| e.in_stage(1, report.domain))?);
            Ok(())
        },
    )?;
    Ok(Prefix {
        state,
        rows,
        checkpoints,
        seconds,
    })
}

/// Runs the remaining stages after `prefix` and writes every artifact.
pub(crate) fn finish_run(cfg: &ExperimentConfig, bench: &LoadedBenchmark, prefix: Prefix) -> Result<RunRecord> {
    let resolved = cfg.resolved();
    let out = resolved.output_dir.clone();
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let mut artifacts = Vec::new();

    let vocab_path = out.join("vocab.txt");
    bench.vocab.save(&vocab_path)?;
    artifacts.push(vocab_path);

    let Prefix {
        mut state,
        rows,
        checkpoints,
        mut seconds,
    } = prefix;
    for (i, bytes) in checkpoints.iter().enumerate() {
        let path = out.join(checkpoint_name(i + 1, &bench.domains[i].name));
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        state.histories[i].checkpoint = Some(path);
    }

    let order: Vec<String> = bench.domains.iter().map(|d| d.name.clone()).collect();
    let mut matrix = ForgettingMatrix::sequential(order);
    for row in rows {
        matrix.push_stage(row)?;
    }

    let configs = resolved.stage_configs();
    let mut started = Instant::now();
    let state = train_sequence_from(state, &bench.domains, &configs, Some(&out), |report| {
        seconds.push(started.elapsed().as_secs_f64());
        let row = evaluate_row(report.student, &bench.domains).map_err(|e| e.in_stage(report.stage, report.domain))?;
        matrix.push_stage(row)?;
        started = Instant::now();
        Ok(())
    })?;
    artifacts.extend(state.histories.iter().filter_map(|h| h.checkpoint.clone()));

    let stats = forgetting_stats(&matrix)?;
    let write = |name: &str, f: &dyn Fn(&Path) -> Result<()>| -> Result<PathBuf> {
        let path = out.join(name);
        f(&path)?;
        Ok(path)
    };
    artifacts.push(write("metrics.csv", &|p| write_metrics_csv(p, &matrix))?);
    artifacts.push(write("forgetting.csv", &|p| write_forgetting_csv(p, &stats))?);
    artifacts.push(write("losses.csv", &|p| write_losses_csv(p, &state.histories))?);
    artifacts.push(write("matrix.json", &|p| write_json(p, &matrix))?);
    artifacts.push(write("forgetting.svg", &|p| {
        emit_forgetting_svg(&[(method_label(&resolved).as_str(), &matrix)], &matrix.domains[0], p)
    })?);
    let snapshot = RunSnapshot {
        kind: RUN_KIND.into(),
        config: resolved.clone(),
    };
    artifacts.push(write("run.json", &|p| write_json(p, &snapshot))?);

    if let Some(missing) = artifacts.iter().find(|p| !p.exists()) {
        return Err(Error::Config(format!("artifact {} was not written", missing.display())));
    }
    Ok(RunRecord {
        config: resolved,
        histories: state.histories,
        teachers: state.teachers,
        matrix,
        stats,
        stage_seconds: seconds,
        artifacts,
    })
}

/// Human-readable arm label, e.g. `baseline` or `mkt lambda=0.01`.
pub fn method_label(cfg: &ExperimentConfig) -> String {
    match cfg.method {
        super::Method::Baseline => "baseline".into(),
        super::Method::Mkt => format!("mkt lambda={}", cfg.stage.lambda),
    }
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Synthesizes or loads the benchmark, trains every stage in order,
/// evaluates every domain after every stage and writes the run directory:
/// `metrics.csv`, `forgetting.csv`, `losses.csv`, `matrix.json`,
/// `forgetting.svg`, `vocab.txt`, one checkpoint per stage and `run.json`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let bench = load_benchmark(cfg)?;
    let prefix = first_stage(cfg, &bench)?;
    finish_run(cfg, &bench, prefix)
}
