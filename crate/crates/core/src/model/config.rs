use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a [`WindowTagger`](super::WindowTagger).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    /// Characters of context on each side of the predicted position.
    pub window: usize,
    pub hidden_dim: usize,
}

impl ModelConfig {
    pub fn new(vocab_size: usize) -> Self {
        Self {
            vocab_size,
            embed_dim: 32,
            window: 2,
            hidden_dim: 256,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 || self.embed_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::InvalidModelConfig(format!(
                "dimensions must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    /// Number of window slots, `2w + 1`.
    pub fn slots(&self) -> usize {
        2 * self.window + 1
    }

    /// Width of the concatenated window embedding fed to the hidden layer.
    pub fn input_dim(&self) -> usize {
        self.slots() * self.embed_dim
    }
}
