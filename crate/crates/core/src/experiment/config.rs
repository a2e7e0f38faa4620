use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{BenchmarkDesign, DomainSpec, DEFAULT_DOMAINS};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::training::{check_lambda, OptimizerKind, StageConfig};

/// Marker stored in `run.json` so a run snapshot can be told apart from a
/// plain config file.
pub const RUN_KIND: &str = "mkt-run";

/// Where the domains come from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkSource {
    /// The default four-domain synthetic benchmark, seeded by `master_seed`.
    #[default]
    Default,
    /// A synthetic benchmark with a non-default layout, seeded by `master_seed`.
    Design(BenchmarkDesign),
    /// Explicit domain specs; each carries its own seed.
    Specs(Vec<DomainSpec>),
    /// Corpus files on disk, one train and one test file per domain.
    Paths(Vec<CorpusFiles>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusFiles {
    pub name: String,
    pub train: PathBuf,
    pub test: PathBuf,
}

impl BenchmarkSource {
    /// Domain names in the order the source lists them.
    pub fn domain_names(&self) -> Vec<String> {
        match self {
            BenchmarkSource::Default | BenchmarkSource::Design(_) => {
                DEFAULT_DOMAINS.iter().map(|s| s.to_string()).collect()
            }
            BenchmarkSource::Specs(specs) => specs.iter().map(|s| s.name.clone()).collect(),
            BenchmarkSource::Paths(files) => files.iter().map(|f| f.name.clone()).collect(),
        }
    }
}

/// Model shape without the vocabulary size, which is taken from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    pub embed_dim: usize,
    pub window: usize,
    pub hidden_dim: usize,
}

impl Default for ModelSettings {
    fn default() -> Self {
        let c = ModelConfig::new(0);
        Self {
            embed_dim: c.embed_dim,
            window: c.window,
            hidden_dim: c.hidden_dim,
        }
    }
}

impl ModelSettings {
    pub fn with_vocab(&self, vocab_size: usize) -> ModelConfig {
        ModelConfig {
            vocab_size,
            embed_dim: self.embed_dim,
            window: self.window,
            hidden_dim: self.hidden_dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Plain sequential fine-tuning: lambda is forced to 0.
    Baseline,
    #[default]
    Mkt,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Method::Baseline),
            "mkt" => Ok(Method::Mkt),
            other => Err(Error::Config(format!("unknown method `{other}` (expected baseline or mkt)"))),
        }
    }
}

/// Per-domain changes to the shared stage config. Lambda is deliberately
/// absent: it stays uniform across stages.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StagePatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shuffle_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerKind>,
}

impl StagePatch {
    pub fn apply(&self, base: StageConfig) -> StageConfig {
        StageConfig {
            epochs: self.epochs.unwrap_or(base.epochs),
            batch_size: self.batch_size.unwrap_or(base.batch_size),
            learning_rate: self.learning_rate.unwrap_or(base.learning_rate),
            shuffle_seed: self.shuffle_seed.unwrap_or(base.shuffle_seed),
            optimizer: self.optimizer.unwrap_or(base.optimizer),
            lambda: base.lambda,
        }
    }
}

/// One end-to-end run: benchmark, training order, model, stages and method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub benchmark: BenchmarkSource,
    /// Training order. Empty means the benchmark's own order.
    #[serde(default)]
    pub domain_order: Vec<String>,
    #[serde(default)]
    pub model: ModelSettings,
    #[serde(default)]
    pub stage: StageConfig,
    /// Overrides keyed by domain name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub stage_overrides: BTreeMap<String, StagePatch>,
    #[serde(default)]
    pub method: Method,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub master_seed: u64,
}

/// The on-disk snapshot of a resolved run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSnapshot {
    pub kind: String,
    pub config: ExperimentConfig,
}

impl ExperimentConfig {
    /// Epoch count for each specialty stage of the default benchmark. With
    /// 200 sentences and batches of 64 this gives a few hundred optimizer
    /// steps per stage.
    pub const SPECIALTY_EPOCHS: usize = 60;

    /// A neutral config: defaults everywhere, no stage overrides.
    pub fn new(output_dir: impl Into<PathBuf>) -> Self {
        Self {
            benchmark: BenchmarkSource::Default,
            domain_order: Vec::new(),
            model: ModelSettings::default(),
            stage: StageConfig::default(),
            stage_overrides: BTreeMap::new(),
            method: Method::Mkt,
            output_dir: output_dir.into(),
            master_seed: 0,
        }
    }

    /// The default benchmark with its calibrated training schedule: ten
    /// epochs on the general domain, then [`Self::SPECIALTY_EPOCHS`] on each
    /// specialty domain.
    pub fn calibrated(output_dir: impl Into<PathBuf>) -> Self {
        let mut cfg = Self::new(output_dir);
        cfg.domain_order = DEFAULT_DOMAINS.iter().map(|s| s.to_string()).collect();
        for name in &DEFAULT_DOMAINS[1..] {
            let patch = StagePatch {
                epochs: Some(Self::SPECIALTY_EPOCHS),
                ..Default::default()
            };
            cfg.stage_overrides.insert(name.to_string(), patch);
        }
        cfg
    }

    /// Reads a config file. A `run.json` snapshot is accepted too and yields
    /// the config it recorded.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("kind").and_then(|k| k.as_str()) == Some(RUN_KIND) {
            let snapshot: RunSnapshot = serde_json::from_value(value)?;
            Ok(snapshot.config)
        } else {
            serde_json::from_value(value)
        }
    }

    /// Lambda actually used for training.
    pub fn effective_lambda(&self) -> f64 {
        match self.method {
            Method::Baseline => 0.0,
            Method::Mkt => self.stage.lambda,
        }
    }

    /// The training order, falling back to the benchmark's own order.
    pub fn resolved_order(&self) -> Vec<String> {
        if self.domain_order.is_empty() {
            self.benchmark.domain_names()
        } else {
            self.domain_order.clone()
        }
    }

    /// Stage configs in training order with overrides and method applied.
    pub fn stage_configs(&self) -> Vec<StageConfig> {
        let base = StageConfig {
            lambda: self.effective_lambda(),
            ..self.stage
        };
        self.resolved_order()
            .iter()
            .map(|name| self.stage_overrides.get(name).map_or(base, |p| p.apply(base)))
            .collect()
    }

    /// Copy with defaults filled in, as written to `run.json`.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.domain_order = self.resolved_order();
        out
    }

    pub fn validate(&self) -> Result<()> {
        let available = self.benchmark.domain_names();
        let mut seen = BTreeSet::new();
        for name in &available {
            if !seen.insert(name) {
                return Err(Error::Config(format!("benchmark lists domain `{name}` twice")));
            }
        }
        let order = self.resolved_order();
        if order.is_empty() {
            return Err(Error::Config("no domains to train on".into()));
        }
        let mut used = BTreeSet::new();
        for name in &order {
            if !seen.contains(name) {
                return Err(Error::UnknownDomain(name.clone()));
            }
            if !used.insert(name) {
                return Err(Error::Config(format!("domain `{name}` appears twice in domain_order")));
            }
        }
        if let Some(name) = self.stage_overrides.keys().find(|k| !used.contains(k)) {
            return Err(Error::Config(format!("stage override for `{name}`, which is not trained")));
        }
        check_lambda(self.stage.lambda)?;
        for cfg in self.stage_configs() {
            cfg.validate()?;
        }
        self.model.with_vocab(1).validate()?;
        if let BenchmarkSource::Design(d) = &self.benchmark {
            d.validate()?;
        }
        Ok(())
    }
}

/// A lambda sweep over one base experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    #[serde(default = "SweepConfig::default_lambdas")]
    pub lambdas: Vec<f64>,
}

impl SweepConfig {
    pub fn default_lambdas() -> Vec<f64> {
        vec![0.0, 0.001, 0.005, 0.01, 0.015, 0.02, 0.05, 0.1, 0.2, 0.5, 0.8]
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.lambdas.is_empty() {
            return Err(Error::Config("sweep needs at least one lambda".into()));
        }
        for &l in &self.lambdas {
            check_lambda(l)?;
        }
        if self.lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep lambdas must be sorted and free of duplicates".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::parse(r#"{"output_dir": "x", "lamda": 0.5}"#).unwrap_err();
        assert!(err.to_string().contains("lamda"), "{err}");
        let err = ExperimentConfig::parse(r#"{"output_dir": "x", "stage": {"lamda": 0.5}}"#).unwrap_err();
        assert!(err.to_string().contains("lamda"), "{err}");
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::parse(r#"{"output_dir": "out"}"#).unwrap();
        assert_eq!(cfg, ExperimentConfig::new("out"));
        assert_eq!(cfg.resolved_order(), DEFAULT_DOMAINS);
    }

    #[test]
    fn benchmark_forms_parse() {
        let d = ExperimentConfig::parse(r#"{"output_dir": "o", "benchmark": "default"}"#).unwrap();
        assert_eq!(d.benchmark, BenchmarkSource::Default);
        let p = ExperimentConfig::parse(
            r#"{"output_dir": "o", "benchmark": {"paths": [{"name": "a", "train": "a.tsv", "test": "b.tsv"}]}}"#,
        )
        .unwrap();
        assert_eq!(p.benchmark.domain_names(), ["a"]);
        let g = ExperimentConfig::parse(r#"{"output_dir": "o", "benchmark": {"design": {"general_train": 50}}}"#)
            .unwrap();
        assert!(matches!(g.benchmark, BenchmarkSource::Design(d) if d.general_train == 50));
    }

    #[test]
    fn baseline_forces_lambda_zero() {
        let mut cfg = ExperimentConfig::calibrated("o");
        cfg.stage.lambda = 0.3;
        assert!(cfg.stage_configs().iter().all(|s| s.lambda == 0.3));
        cfg.method = Method::Baseline;
        assert!(cfg.stage_configs().iter().all(|s| s.lambda == 0.0));
    }

    #[test]
    fn overrides_apply_per_domain() {
        let cfg = ExperimentConfig::calibrated("o");
        let epochs: Vec<_> = cfg.stage_configs().iter().map(|s| s.epochs).collect();
        assert_eq!(epochs, [10, 60, 60, 60]);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn order_must_resolve() {
        let mut cfg = ExperimentConfig::new("o");
        cfg.domain_order = vec!["general".into(), "space".into()];
        assert!(matches!(cfg.validate(), Err(Error::UnknownDomain(d)) if d == "space"));
        cfg.domain_order = vec!["car".into(), "car".into()];
        assert!(cfg.validate().is_err());
        cfg.domain_order = vec!["car".into()];
        cfg.stage_overrides.insert("law".into(), StagePatch::default());
        assert!(cfg.validate().is_err(), "override for an untrained domain");
        cfg.stage_overrides.clear();
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn run_snapshot_round_trips() {
        let mut cfg = ExperimentConfig::calibrated("o");
        cfg.master_seed = 9;
        let snap = RunSnapshot {
            kind: RUN_KIND.into(),
            config: cfg.resolved(),
        };
        let text = serde_json::to_string_pretty(&snap).unwrap();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg.resolved());
    }

    #[test]
    fn sweep_validation() {
        let mut sweep = SweepConfig {
            base: ExperimentConfig::new("o"),
            lambdas: SweepConfig::default_lambdas(),
        };
        assert!(sweep.validate().is_ok());
        sweep.lambdas = vec![0.1, 0.01];
        assert!(sweep.validate().is_err());
        sweep.lambdas = vec![0.1, 0.1];
        assert!(sweep.validate().is_err());
        sweep.lambdas = vec![];
        assert!(sweep.validate().is_err());
        sweep.lambdas = vec![1.5];
        assert!(sweep.validate().is_err());
        let parsed: SweepConfig = serde_json::from_str(r#"{"base": {"output_dir": "o"}}"#).unwrap();
        assert_eq!(parsed.lambdas.len(), 11);
    }

    #[test]
    fn method_parses() {
        assert_eq!("baseline".parse::<Method>().unwrap(), Method::Baseline);
        assert!("ewc".parse::<Method>().is_err());
    }
}
