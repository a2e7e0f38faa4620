use std::fs;
use std::path::Path;

use crate::corpus::sentence::ParallelSentence;
use crate::corpus::vocab::Vocabulary;
use crate::error::{Error, Result};

/// Reads a `source<TAB>target` corpus file. With `vocab` absent a fresh
/// vocabulary covering every character in the file is built; otherwise the
/// given vocabulary is returned unchanged and unseen characters become UNK.
pub fn load_corpus(path: &Path, vocab: Option<&Vocabulary>) -> Result<(Vec<ParallelSentence>, Vocabulary)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut fresh = vocab.is_none().then(Vocabulary::new);
    let mut sentences = Vec::new();
    for (i, (source, target)) in parse_lines(path, &text)? {
        let (src, tgt) = match (&mut fresh, vocab) {
            (Some(v), _) => (v.encode_extend(source), v.encode_extend(target)),
            (None, Some(v)) => (v.encode(source), v.encode(target)),
            (None, None) => unreachable!(),
        };
        let sentence = ParallelSentence::new(src, tgt).map_err(|e| Error::MalformedLine {
            path: path.to_path_buf(),
            line: i,
            message: e.to_string(),
        })?;
        sentences.push(sentence);
    }
    let vocab = match fresh {
        Some(v) => v,
        None => vocab.cloned().unwrap_or_default(),
    };
    Ok((sentences, vocab))
}

/// Extends `vocab` with every character in a corpus file without encoding it.
pub fn scan_corpus_chars(path: &Path, vocab: &mut Vocabulary) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    for (_, (source, target)) in parse_lines(path, &text)? {
        source.chars().chain(target.chars()).for_each(|c| {
            vocab.insert(c);
        });
    }
    Ok(())
}

fn parse_lines<'a>(path: &Path, text: &'a str) -> Result<Vec<(usize, (&'a str, &'a str))>> {
    let mut out = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| Error::MalformedLine {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let (source, target) = line
            .split_once('\t')
            .ok_or_else(|| malformed("missing tab separator".into()))?;
        if target.contains('\t') {
            return Err(malformed("more than one tab separator".into()));
        }
        let (ns, nt) = (source.chars().count(), target.chars().count());
        if ns != nt {
            return Err(malformed(format!("unequal lengths at line {line_no} ({ns} vs {nt})")));
        }
        if ns == 0 {
            return Err(malformed("empty sentence".into()));
        }
        out.push((line_no, (source, target)));
    }
    Ok(out)
}

/// Writes sentences in the `source<TAB>target` format, one per LF-terminated line.
pub fn write_corpus(path: &Path, sentences: &[ParallelSentence], vocab: &Vocabulary) -> Result<()> {
    fs::write(path, render_corpus(sentences, vocab)).map_err(|e| Error::io(path, e))
}

pub fn render_corpus(sentences: &[ParallelSentence], vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&vocab.decode(s.source()));
        out.push('\t');
        out.push_str(&vocab.decode(s.target()));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_with(contents: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.tsv");
        fs::write(&path, contents).unwrap();
        (dir, path)
    }

    #[test]
    fn single_line_fresh_vocab() {
        let (_d, path) = file_with("ab\tac\n");
        let (sentences, vocab) = load_corpus(&path, None).unwrap();
        assert_eq!(sentences.len(), 1);
        let id = |c| vocab.id(c).unwrap();
        assert_eq!(sentences[0].source(), &[id('a'), id('b')]);
        assert_eq!(sentences[0].target(), &[id('a'), id('c')]);
        // three distinct characters plus PAD and UNK
        assert_eq!(vocab.size(), 3 + 2);
    }

    #[test]
    fn unequal_lengths_name_the_line() {
        let (_d, path) = file_with("abc\tab\n");
        let err = load_corpus(&path, None).unwrap_err();
        assert!(err.to_string().contains("unequal lengths at line 1"), "{err}");
    }

    #[test]
    fn missing_tab_is_an_error() {
        let (_d, path) = file_with("ab\tab\n\nabab\n");
        let err = load_corpus(&path, None).unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 3, .. }), "{err}");
    }

    #[test]
    fn blank_lines_ignored_and_unk_with_given_vocab() {
        let (_d, path) = file_with("\nab\tab\n\nzb\tab\n");
        let vocab = Vocabulary::from_chars("ab".chars());
        let (sentences, v) = load_corpus(&path, Some(&vocab)).unwrap();
        assert_eq!(v, vocab);
        assert_eq!(sentences.len(), 2);
        assert_eq!(sentences[1].source()[0], crate::corpus::UNK);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_corpus(Path::new("/nonexistent/corpus.tsv"), None).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
