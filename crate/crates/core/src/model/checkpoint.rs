//! Binary checkpoint format: magic `MKT1`, then `V, E, w, H` as u32
//! little-endian, then every tensor in declaration order as row-major f32
//! little-endian.

use std::fs;
use std::path::Path;

use super::config::ModelConfig;
use super::params::Parameters;
use super::tagger::WindowTagger;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"MKT1";
const HEADER_LEN: usize = 4 + 4 * 4;

pub(crate) fn encode(params: &Parameters<f32>) -> Vec<u8> {
    let cfg = params.config();
    let mut out = Vec::with_capacity(HEADER_LEN + params.as_slice().len() * 4);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    for dim in [cfg.vocab_size, cfg.embed_dim, cfg.window, cfg.hidden_dim] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for x in params.as_slice() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub(crate) fn decode(bytes: &[u8]) -> Result<Parameters<f32>> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Checkpoint(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("wrong magic bytes".into()));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
    let config = ModelConfig {
        vocab_size: dim(0),
        embed_dim: dim(1),
        window: dim(2),
        hidden_dim: dim(3),
    };
    config.validate()?;
    let expected = Parameters::<f32>::zeros(config).as_slice().len();
    let body = &bytes[HEADER_LEN..];
    if body.len() != expected * 4 {
        return Err(Error::Checkpoint(format!(
            "expected {} parameter bytes for {config:?}, found {}",
            expected * 4,
            body.len()
        )));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Parameters::from_flat(config, data)
}

pub fn write_checkpoint(path: &Path, model: &WindowTagger<f32>) -> Result<()> {
    fs::write(path, encode(model.parameters())).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<WindowTagger<f32>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    WindowTagger::from_params(decode(&bytes).map_err(|e| match e {
        Error::Checkpoint(m) => Error::Checkpoint(format!("{}: {m}", path.display())),
        e => e,
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CorrectionModel;

    fn model() -> WindowTagger<f32> {
        WindowTagger::new(
            ModelConfig {
                vocab_size: 9,
                embed_dim: 3,
                window: 2,
                hidden_dim: 4,
            },
            17,
        )
        .unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = model().checkpoint_bytes();
        assert_eq!(&bytes[..4], b"MKT1");
        assert_eq!(&bytes[4..8], &9u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &2u32.to_le_bytes());
        assert_eq!(bytes.len(), HEADER_LEN + 4 * model().params().len());
        // first embedding entry follows the header
        assert_eq!(&bytes[20..24], &model().params()[0].to_le_bytes());
    }

    #[test]
    fn roundtrip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let m = model();
        write_checkpoint(&path, &m).unwrap();
        assert_eq!(read_checkpoint(&path).unwrap(), m);
    }

    #[test]
    fn rejects_bad_magic_and_length() {
        let mut bytes = model().checkpoint_bytes();
        bytes.pop();
        assert!(decode(&bytes).is_err());
        let mut bytes = model().checkpoint_bytes();
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::Checkpoint(m)) if m.contains("magic")));
        let mut bytes = model().checkpoint_bytes();
        bytes.extend_from_slice(&[0; 4]);
        assert!(decode(&bytes).is_err());
        assert!(decode(b"MKT1").is_err());
    }
}
