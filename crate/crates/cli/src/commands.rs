use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mkt_core::corpus::{load_corpus, synthesize_domain, vocabulary_for_specs, write_corpus, BenchmarkDesign};
use mkt_core::eval::{detection_f1, predict_all, sentence_f1};
use mkt_core::experiment::{
    emit_forgetting_svg, method_label, read_metrics_csv, BenchmarkSource, ExperimentConfig, RUN_KIND,
};
use mkt_core::model::read_checkpoint;
use mkt_core::{run_experiment, run_sweep, CorrectionModel, DomainCorpus, DomainSpec, SweepConfig, Vocabulary};

use crate::{Command, RunArgs};

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth { out, seed, config } => synth(&out, seed, config.as_deref()),
        Command::Train { run, lambda, method } => {
            let mut cfg = load_experiment(&run)?;
            if let Some(lambda) = lambda {
                cfg.stage.lambda = lambda;
            }
            if let Some(method) = method {
                cfg.method = method;
            }
            let record = run_experiment(&cfg)?;
            println!(
                "{}: final average F1 {:.4} after {} stages, artifacts in {}",
                method_label(&record.config),
                record.stats.final_average,
                record.histories.len(),
                record.config.output_dir.display()
            );
            Ok(())
        }
        Command::Sweep { run, lambdas } => {
            let mut sweep = load_sweep(&run.config)?;
            if let Some(out) = run.out {
                sweep.base.output_dir = out;
            }
            if let Some(seed) = run.seed {
                sweep.base.master_seed = seed;
            }
            if let Some(lambdas) = lambdas {
                sweep.lambdas = lambdas;
            }
            let record = run_sweep(&sweep)?;
            for (lambda, avg) in record.lambdas.iter().zip(record.averages()) {
                println!("lambda {lambda}: final average F1 {avg:.4}");
            }
            println!("summary: {}", record.summary.display());
            Ok(())
        }
        Command::Eval { checkpoint, corpus, vocab } => eval(&checkpoint, &corpus, &vocab),
        Command::Plot { runs, domain, out } => plot(&runs, &domain, &out),
    }
}

fn load_experiment(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    Ok(cfg)
}

/// A sweep file (`{"base": ..., "lambdas": ...}`) or a plain experiment
/// config, which is swept over the default lambda list.
fn load_sweep(path: &Path) -> Result<SweepConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("base").is_some() {
        return Ok(SweepConfig::load(path)?);
    }
    let base = ExperimentConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(SweepConfig {
        base,
        lambdas: SweepConfig::default_lambdas(),
    })
}

fn synth(out: &Path, seed: Option<u64>, config: Option<&Path>) -> Result<()> {
    let cfg = match config {
        Some(path) => Some(ExperimentConfig::load(path)?),
        None => None,
    };
    let seed = seed.or(cfg.as_ref().map(|c| c.master_seed)).unwrap_or(0);
    let source = cfg.map(|c| c.benchmark).unwrap_or_default();
    let (specs, vocab, domains): (Vec<DomainSpec>, Vocabulary, Vec<DomainCorpus>) = match source {
        BenchmarkSource::Default => {
            let b = BenchmarkDesign::default().build(seed)?;
            (b.specs, b.vocab, b.domains)
        }
        BenchmarkSource::Design(design) => {
            let b = design.build(seed)?;
            (b.specs, b.vocab, b.domains)
        }
        BenchmarkSource::Specs(specs) => {
            let vocab = vocabulary_for_specs(&specs);
            let domains = specs
                .iter()
                .map(|s| synthesize_domain(s, &vocab))
                .collect::<mkt_core::Result<Vec<_>>>()?;
            (specs, vocab, domains)
        }
        BenchmarkSource::Paths(_) => bail!("the config's benchmark is already a list of corpus files"),
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    vocab.save(&out.join("vocab.txt"))?;
    for d in &domains {
        write_corpus(&out.join(format!("{}.train.tsv", d.name)), &d.train, &vocab)?;
        write_corpus(&out.join(format!("{}.test.tsv", d.name)), &d.test, &vocab)?;
    }
    let specs_path = out.join("specs.json");
    let mut text = serde_json::to_string_pretty(&specs)?;
    text.push('\n');
    fs::write(&specs_path, text).with_context(|| format!("writing {}", specs_path.display()))?;
    println!("wrote {} domains to {}", domains.len(), out.display());
    Ok(())
}

fn eval(checkpoint: &Path, corpus: &Path, vocab_path: &Path) -> Result<()> {
    let model = read_checkpoint(checkpoint)?;
    let vocab = Vocabulary::load(vocab_path)?;
    if vocab.size() != model.vocab_size() {
        bail!(
            "{} has {} symbols but {} was trained with {}",
            vocab_path.display(),
            vocab.size(),
            checkpoint.display(),
            model.vocab_size()
        );
    }
    let (sentences, _) = load_corpus(corpus, Some(&vocab))?;
    let triples = predict_all(&model, &sentences)?;
    let report = serde_json::json!({
        "corpus": corpus,
        "checkpoint": checkpoint,
        "correction": sentence_f1(&triples)?,
        "detection": detection_f1(&triples)?,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

/// Maps a run directory, or a CSV file inside one, to the directory.
fn run_dir(path: &Path) -> PathBuf {
    if path.is_file() {
        path.parent().map(Path::to_path_buf).unwrap_or_default()
    } else {
        path.to_path_buf()
    }
}

/// Legend label: the run's method from run.json when present, else the
/// directory name.
fn run_label(dir: &Path) -> String {
    let from_snapshot = fs::read_to_string(dir.join("run.json"))
        .ok()
        .and_then(|text| ExperimentConfig::parse(&text).ok().filter(|_| text.contains(RUN_KIND)))
        .map(|cfg| method_label(&cfg));
    from_snapshot.unwrap_or_else(|| {
        dir.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string())
    })
}

fn plot(runs: &[PathBuf], domain: &str, out: &Path) -> Result<()> {
    let mut loaded = Vec::with_capacity(runs.len());
    for path in runs {
        let dir = run_dir(path);
        let matrix = read_metrics_csv(&dir.join("metrics.csv"))?;
        loaded.push((run_label(&dir), matrix));
    }
    let series: Vec<(&str, &_)> = loaded.iter().map(|(l, m)| (l.as_str(), m)).collect();
    emit_forgetting_svg(&series, domain, out)?;
    println!("wrote {}", out.display());
    Ok(())
}
