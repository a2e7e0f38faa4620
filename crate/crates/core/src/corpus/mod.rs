//! Parallel correction corpora: data model, file format, and the seeded
//! synthetic multi-domain generator.

mod benchmark;
mod io;
mod sentence;
mod synth;
mod vocab;

pub(crate) use benchmark::build_from_specs;
pub use benchmark::{build_default_benchmark, Benchmark, BenchmarkDesign, ALPHABET_START, DEFAULT_DOMAINS};
pub use io::{load_corpus, render_corpus, scan_corpus_chars, write_corpus};
pub use sentence::{DomainCorpus, ParallelSentence};
pub use synth::{synthesize_domain, vocabulary_for_specs, ConfusionSet, DomainSpec, MAX_DISJOINT_RETRIES};
pub use vocab::{Vocabulary, PAD, RESERVED, UNK};

