use crate::corpus::vocab::PAD;
use crate::error::{Error, Result};

/// An equal-length (source, target) pair of character ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParallelSentence {
    source: Vec<u32>,
    target: Vec<u32>,
}

impl ParallelSentence {
    pub fn new(source: Vec<u32>, target: Vec<u32>) -> Result<Self> {
        if source.is_empty() {
            return Err(Error::InvalidSentence("empty sentence".into()));
        }
        if source.len() != target.len() {
            return Err(Error::InvalidSentence(format!(
                "unequal lengths {} and {}",
                source.len(),
                target.len()
            )));
        }
        if source.contains(&PAD) || target.contains(&PAD) {
            return Err(Error::InvalidSentence("PAD id inside sentence".into()));
        }
        Ok(Self { source, target })
    }

    pub fn source(&self) -> &[u32] {
        &self.source
    }

    pub fn target(&self) -> &[u32] {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn is_erroneous(&self) -> bool {
        self.source != self.target
    }
}

/// One domain's train and test splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainCorpus {
    pub name: String,
    pub train: Vec<ParallelSentence>,
    pub test: Vec<ParallelSentence>,
}

impl DomainCorpus {
    pub fn new(name: impl Into<String>, train: Vec<ParallelSentence>, test: Vec<ParallelSentence>) -> Self {
        Self {
            name: name.into(),
            train,
            test,
        }
    }

    /// Number of training samples seen per epoch at this domain's stage.
    pub fn train_len(&self) -> usize {
        self.train.len()
    }
}
