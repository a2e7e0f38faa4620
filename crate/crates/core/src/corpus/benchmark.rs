//! The default four-domain benchmark: one large general domain followed by
//! three small specialty domains whose vocabularies collide.
//!
//! Characters are consecutive code points starting at [`ALPHABET_START`]
//! (the start of the CJK Unified Ideographs block). Every domain draws its
//! words from the same alphabet, so domain knowledge lives in which
//! combinations are correct rather than in new characters. Only the
//! resulting id space matters to the model.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sentence::DomainCorpus;
use super::synth::{synthesize_domain, vocabulary_for_specs, ConfusionSet, DomainSpec};
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

pub const ALPHABET_START: u32 = 0x4E00;

pub const DEFAULT_DOMAINS: [&str; 4] = ["general", "car", "med", "law"];

/// Knobs of the default benchmark layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkDesign {
    /// Characters used by every domain.
    pub alphabet_size: usize,
    pub shared_words: usize,
    pub general_words: usize,
    pub specialty_words: usize,
    pub word_len: (usize, usize),
    pub confusions_per_char: usize,
    pub general_error_rate: f64,
    pub specialty_error_rate: f64,
    pub general_train: usize,
    pub specialty_train: usize,
    pub test: usize,
    pub sentence_len_range: (usize, usize),
    /// Specialty domain pairs (0-based among the specialty domains) that
    /// share conflict words.
    pub conflict_pairs: Vec<(usize, usize)>,
    /// Conflict words shared by each pair.
    pub conflicts_per_pair: usize,
}

impl Default for BenchmarkDesign {
    fn default() -> Self {
        Self {
            alphabet_size: 60,
            shared_words: 120,
            general_words: 10,
            specialty_words: 8,
            word_len: (2, 3),
            confusions_per_char: 1,
            general_error_rate: 0.15,
            specialty_error_rate: 0.15,
            general_train: 20_000,
            specialty_train: 200,
            test: 500,
            sentence_len_range: (4, 7),
            conflict_pairs: vec![(0, 1), (1, 2)],
            conflicts_per_pair: 3,
        }
    }
}

/// Domains in training order plus the vocabulary shared by all of them.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub vocab: Vocabulary,
    pub specs: Vec<DomainSpec>,
    pub domains: Vec<DomainCorpus>,
}

/// The default benchmark: general (20000 train) then car, med and law
/// (200 train each), 500 test sentences per domain.
pub fn build_default_benchmark(seed: u64) -> Result<Benchmark> {
    BenchmarkDesign::default().build(seed)
}

impl BenchmarkDesign {
    pub fn specs(&self, seed: u64) -> Vec<DomainSpec> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        let code = |i: usize| char::from_u32(ALPHABET_START + i as u32).unwrap();
        let alphabet: Vec<char> = (0..self.alphabet_size).map(code).collect();

        let mut taken = BTreeSet::new();
        let shared = self.words(&mut rng, &alphabet, self.shared_words, &mut taken);
        let general = self.words(&mut rng, &alphabet, self.general_words, &mut taken);
        let mut specialty: Vec<Vec<String>> = (0..3)
            .map(|_| self.words(&mut rng, &alphabet, self.specialty_words, &mut taken))
            .collect();

        let mut confusion = ConfusionSet::new();
        for &c in &alphabet {
            while confusion.get(c).map_or(0, <[char]>::len) < self.confusions_per_char {
                let other = *alphabet.choose(&mut rng).unwrap();
                if other != c {
                    confusion.add(c, other);
                }
            }
        }

        // Conflict words: one surface form, corrected to a different word in
        // each domain of the pair.
        let mut conflicts: Vec<Vec<(String, String)>> = vec![Vec::new(); 3];
        for &(a, b) in &self.conflict_pairs {
            for _ in 0..self.conflicts_per_pair {
                let (surface, wa, wb) = loop {
                    let len = rng.random_range(self.word_len.0..=self.word_len.1);
                    let stem: String = (0..len - 1).map(|_| *alphabet.choose(&mut rng).unwrap()).collect();
                    let pick = |rng: &mut ChaCha8Rng| *alphabet.choose(rng).unwrap();
                    let (wrong, ca, cb) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
                    let surface = format!("{stem}{wrong}");
                    let (wa, wb) = (format!("{stem}{ca}"), format!("{stem}{cb}"));
                    let distinct = wrong != ca && wrong != cb && ca != cb;
                    if distinct && ![&surface, &wa, &wb].iter().any(|w| taken.contains(*w)) {
                        break (surface, wa, wb);
                    }
                };
                taken.extend([surface.clone(), wa.clone(), wb.clone()]);
                for (d, word) in [(a, wa), (b, wb)] {
                    specialty[d].push(word.clone());
                    conflicts[d].push((surface.clone(), word));
                }
            }
        }

        let mut specs = vec![DomainSpec {
            name: DEFAULT_DOMAINS[0].into(),
            shared_lexicon: shared.clone(),
            domain_lexicon: general,
            confusion: confusion.clone(),
            conflict_words: Vec::new(),
            error_rate: self.general_error_rate,
            n_train: self.general_train,
            n_test: self.test,
            sentence_len_range: self.sentence_len_range,
            seed: rng.random(),
        }];
        for (i, (lexicon, conflict_words)) in specialty.into_iter().zip(conflicts).enumerate() {
            specs.push(DomainSpec {
                name: DEFAULT_DOMAINS[i + 1].into(),
                shared_lexicon: shared.clone(),
                domain_lexicon: lexicon,
                confusion: confusion.clone(),
                conflict_words,
                error_rate: self.specialty_error_rate,
                n_train: self.specialty_train,
                n_test: self.test,
                sentence_len_range: self.sentence_len_range,
                seed: rng.random(),
            });
        }
        specs
    }

    fn words(&self, rng: &mut ChaCha8Rng, alphabet: &[char], count: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let len = rng.random_range(self.word_len.0..=self.word_len.1);
            let word: String = (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect();
            if taken.insert(word.clone()) {
                out.push(word);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("benchmark design: {m}")));
        if self.alphabet_size < 4 {
            return bad(format!("alphabet_size {} is below 4", self.alphabet_size));
        }
        if self.word_len.0 < 2 || self.word_len.0 > self.word_len.1 {
            return bad(format!("word_len {:?} must satisfy 2 <= min <= max", self.word_len));
        }
        if self.confusions_per_char >= self.alphabet_size {
            return bad("confusions_per_char must be below alphabet_size".into());
        }
        if self.general_words == 0 || self.specialty_words == 0 {
            return bad("every domain needs at least one domain word".into());
        }
        let room = (self.alphabet_size as f64).powi(self.word_len.1 as i32);
        let wanted = self.shared_words
            + self.general_words
            + 3 * self.specialty_words
            + 3 * self.conflict_pairs.len() * self.conflicts_per_pair;
        if wanted as f64 > room / 2.0 {
            return bad(format!("{wanted} distinct words do not fit the alphabet"));
        }
        for &(a, b) in &self.conflict_pairs {
            if a >= 3 || b >= 3 || a == b {
                return bad(format!("conflict pair ({a}, {b}) must name two distinct specialty domains in 0..3"));
            }
        }
        Ok(())
    }

    pub fn build(&self, seed: u64) -> Result<Benchmark> {
        self.validate()?;
        let specs = self.specs(seed);
        build_from_specs(specs)
    }
}

pub(crate) fn build_from_specs(specs: Vec<DomainSpec>) -> Result<Benchmark> {
    let vocab = vocabulary_for_specs(&specs);
    let domains = specs
        .iter()
        .map(|s| synthesize_domain(s, &vocab))
        .collect::<Result<Vec<_>>>()?;
    Ok(Benchmark { vocab, specs, domains })
}
