use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Id reserved for padding; fills window slots beyond the sentence boundary.
pub const PAD: u32 = 0;
/// Id for characters absent from the vocabulary.
pub const UNK: u32 = 1;
/// Number of reserved ids preceding the first character id.
pub const RESERVED: usize = 2;

const PAD_GLYPH: char = '\u{2400}';
const UNK_GLYPH: char = '\u{FFFD}';

/// Bijection between characters and integer ids. Character `chars[i]` has id
/// `i + 2`; ids 0 and 1 are PAD and UNK.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    chars: Vec<char>,
    id_of: HashMap<char, u32>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from characters in order of first appearance.
    pub fn from_chars<I: IntoIterator<Item = char>>(chars: I) -> Self {
        let mut vocab = Self::new();
        for c in chars {
            vocab.insert(c);
        }
        vocab
    }

    /// Inserts `c` if absent and returns its id.
    pub fn insert(&mut self, c: char) -> u32 {
        if let Some(&id) = self.id_of.get(&c) {
            return id;
        }
        let id = (self.chars.len() + RESERVED) as u32;
        self.chars.push(c);
        self.id_of.insert(c, id);
        id
    }

    pub fn id(&self, c: char) -> Option<u32> {
        self.id_of.get(&c).copied()
    }

    pub fn char_of(&self, id: u32) -> Option<char> {
        (id as usize)
            .checked_sub(RESERVED)
            .and_then(|i| self.chars.get(i).copied())
    }

    /// Total id space including the reserved ids.
    pub fn size(&self) -> usize {
        self.chars.len() + RESERVED
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    /// Encodes `text`, mapping unseen characters to [`UNK`].
    pub fn encode(&self, text: &str) -> Vec<u32> {
        text.chars().map(|c| self.id(c).unwrap_or(UNK)).collect()
    }

    /// Encodes `text`, adding unseen characters to the vocabulary.
    pub fn encode_extend(&mut self, text: &str) -> Vec<u32> {
        text.chars().map(|c| self.insert(c)).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> String {
        ids.iter()
            .map(|&id| match id {
                PAD => PAD_GLYPH,
                UNK => UNK_GLYPH,
                id => self.char_of(id).unwrap_or(UNK_GLYPH),
            })
            .collect()
    }

    /// Writes one character per line, in id order.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.chars.len() * 4);
        for c in &self.chars {
            out.push(*c);
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut vocab = Self::new();
        for (i, line) in text.split('\n').enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut it = line.chars();
            let (Some(c), None) = (it.next(), it.next()) else {
                return Err(Error::MalformedLine {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "expected exactly one character".into(),
                });
            };
            if vocab.id(c).is_some() {
                return Err(Error::MalformedLine {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: format!("duplicate character {c:?}"),
                });
            }
            vocab.insert(c);
        }
        Ok(vocab)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_follow_reserved_block() {
        let v = Vocabulary::from_chars("abca".chars());
        assert_eq!(v.size(), 5);
        for (i, &c) in v.chars().iter().enumerate() {
            assert_eq!(v.id(c), Some(i as u32 + 2));
            assert_eq!(v.char_of(i as u32 + 2), Some(c));
        }
        assert_eq!(v.char_of(PAD), None);
        assert_eq!(v.char_of(UNK), None);
    }

    #[test]
    fn unseen_characters_encode_as_unk() {
        let v = Vocabulary::from_chars("ab".chars());
        assert_eq!(v.encode("abz"), vec![2, 3, UNK]);
    }

    #[test]
    fn save_load_preserves_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        let v = Vocabulary::from_chars("z y\u{4e00}".chars());
        v.save(&path).unwrap();
        assert_eq!(Vocabulary::load(&path).unwrap(), v);
    }
}
