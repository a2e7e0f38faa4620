use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid sentence: {0}")]
    InvalidSentence(String),

    #[error("invalid domain spec `{domain}`: {message}")]
    InvalidDomainSpec { domain: String, message: String },

    #[error("could not draw a test sentence disjoint from the training split of `{domain}` after {retries} retries")]
    DisjointnessExhausted { domain: String, retries: usize },

    #[error("invalid model config: {0}")]
    InvalidModelConfig(String),

    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    TokenOutOfRange { id: u32, vocab_size: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("lambda must lie in [0, 1], got {0}")]
    LambdaOutOfRange(f64),

    #[error("invalid stage config: {0}")]
    InvalidStageConfig(String),

    #[error("non-finite value in {what} (stage {stage}, epoch {epoch}, batch {batch})")]
    NonFinite {
        what: &'static str,
        stage: usize,
        epoch: usize,
        batch: usize,
    },

    #[error("non-finite gradient entry at parameter index {index}")]
    NonFiniteGradient { index: usize },

    #[error("teacher parameters changed during stage {stage}: checksum {before} became {after}")]
    TeacherModified {
        stage: usize,
        before: String,
        after: String,
    },

    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("stage {stage} (`{domain}`): {source}")]
    Stage {
        stage: usize,
        domain: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: usize, domain: &str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                domain: domain.to_string(),
                source: Box::new(e),
            },
        }
    }
}
