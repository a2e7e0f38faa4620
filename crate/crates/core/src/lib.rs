//! Continual learning for character-level spelling correction.
//!
//! A correction model is trained on a sequence of domains without access to
//! earlier domains' data. At every stage after the first, a frozen copy of the
//! previous stage's student acts as a teacher, and the new student minimizes
//! `lambda * L_soft + (1 - lambda) * L_hard` on the current domain.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod model;
pub mod training;

pub use corpus::{build_default_benchmark, DomainCorpus, DomainSpec, ParallelSentence, Vocabulary};
pub use error::{Error, Result};
pub use eval::{forgetting_stats, sentence_f1, ForgettingMatrix, MetricsReport};
pub use experiment::{run_experiment, run_sweep, ExperimentConfig, Method, RunRecord, SweepConfig};
pub use model::{CorrectionModel, ModelConfig, Parameters, PositionDistributions, WindowTagger};
pub use training::{train_sequence, train_stage, LossBreakdown, StageConfig, StageHistory, TeacherHandle};
