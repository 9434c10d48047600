//! Text ingestion, tokenization, and vocabulary statistics.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A tokenized sentence. Tokens are lowercase with no whitespace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: usize,
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn new(id: usize, tokens: Vec<String>) -> Self {
        Sentence { id, tokens }
    }

    pub fn from_text(id: usize, text: &str) -> Self {
        Sentence {
            id,
            tokens: tokenize(text),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A corpus of sentences with aggregate word statistics.
///
/// `word_count` is the total number of word tokens across all sentences;
/// `vocabulary` maps each distinct token to its occurrence count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub vocabulary: BTreeMap<String, usize>,
    pub word_count: usize,
}

impl Corpus {
    pub fn from_sentences(sentences: Vec<Sentence>) -> Self {
        let mut vocabulary = BTreeMap::new();
        let mut word_count = 0;
        for s in &sentences {
            for t in &s.tokens {
                *vocabulary.entry(t.clone()).or_insert(0) += 1;
                word_count += 1;
            }
        }
        Corpus {
            sentences,
            vocabulary,
            word_count,
        }
    }

    pub fn from_lines<S: AsRef<str>>(lines: impl IntoIterator<Item = S>) -> Self {
        let sentences = lines
            .into_iter()
            .map(|l| tokenize(l.as_ref()))
            .filter(|t| !t.is_empty())
            .enumerate()
            .map(|(id, tokens)| Sentence::new(id, tokens))
            .collect();
        Corpus::from_sentences(sentences)
    }

    /// Number of sentences.
    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    /// Distinct vocabulary size.
    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }
}

/// Lowercase, split on whitespace, strip leading/trailing non-alphanumerics.
/// Internal punctuation (hyphens, apostrophes) is kept, so "right-bottom"
/// survives as one token.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.to_lowercase()
                .trim_matches(|c: char| !c.is_alphanumeric())
                .to_string()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// Load a corpus from a plain-text file, one sentence per line.
/// Blank lines are skipped.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let text = String::from_utf8(bytes).map_err(|e| {
        let line = e.as_bytes()[..e.utf8_error().valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        Error::Corpus(format!("{}: invalid UTF-8 at line {line}", path.display()))
    })?;
    Ok(Corpus::from_lines(text.lines()))
}

/// Per-word occurrence probability, count(w) / word_count.
pub fn word_probability(corpus: &Corpus) -> Result<BTreeMap<String, f64>> {
    if corpus.word_count == 0 {
        return Err(Error::Corpus("no words".into()));
    }
    let n0 = corpus.word_count as f64;
    Ok(corpus
        .vocabulary
        .iter()
        .map(|(w, &c)| (w.clone(), c as f64 / n0))
        .collect())
}

/// Vocabulary sorted by descending frequency, ties broken lexicographically.
pub fn frequency_ranked(corpus: &Corpus) -> Vec<(String, usize)> {
    let mut ranked: Vec<(String, usize)> = corpus
        .vocabulary
        .iter()
        .map(|(w, &c)| (w.clone(), c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}
