//! Shared knowledge base: seed keywords, vocabulary augmentation, and
//! mask-based keyword extraction.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{frequency_ranked, tokenize, Corpus, Sentence};
use crate::error::{Error, Result};

/// How vocabulary words are added to the seed keyword set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// A seeded uniform permutation of the remaining vocabulary; the first
    /// round(rho * |V|) entries are taken. Prefix property: a larger rho with
    /// the same seed yields a superset.
    Random,
    /// Vocabulary sorted by descending corpus frequency (ties lexicographic).
    Ordered,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Scheme::Random),
            "ordered" => Ok(Scheme::Ordered),
            other => Err(Error::Knowledge(format!("unknown scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Random => write!(f, "random"),
            Scheme::Ordered => write!(f, "ordered"),
        }
    }
}

/// The knowledge base shared by transmitter and receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    pub seed_keywords: BTreeSet<String>,
    pub augmented: Vec<String>,
    pub rho: f64,
    pub scheme: Scheme,
    pub rng_seed: u64,
    members: BTreeSet<String>,
}

impl KnowledgeBase {
    /// Build a knowledge base from a seed keyword set and a corpus vocabulary.
    ///
    /// round(rho * |V|) words from the vocabulary (minus the seed) are added,
    /// capped at the number of candidates. Rounding is half-up.
    pub fn build(
        seed: BTreeSet<String>,
        corpus: &Corpus,
        rho: f64,
        scheme: Scheme,
        rng_seed: u64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) || rho.is_nan() {
            return Err(Error::Knowledge(format!("rho {rho} outside [0,1]")));
        }
        let vocab_size = corpus.vocabulary_size();
        let target = (rho * vocab_size as f64 + 0.5).floor() as usize;

        let candidates: Vec<String> = match scheme {
            Scheme::Random => {
                let mut words: Vec<String> = corpus
                    .vocabulary
                    .keys()
                    .filter(|w| !seed.contains(*w))
                    .cloned()
                    .collect();
                let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
                words.shuffle(&mut rng);
                words
            }
            Scheme::Ordered => frequency_ranked(corpus)
                .into_iter()
                .map(|(w, _)| w)
                .filter(|w| !seed.contains(w))
                .collect(),
        };

        let take = target.min(candidates.len());
        let augmented: Vec<String> = candidates.into_iter().take(take).collect();
        let members = seed
            .iter()
            .cloned()
            .chain(augmented.iter().cloned())
            .collect();
        Ok(KnowledgeBase {
            seed_keywords: seed,
            augmented,
            rho,
            scheme,
            rng_seed,
            members,
        })
    }

    /// A base containing only the given keywords (rho = 0).
    pub fn from_keywords(seed: BTreeSet<String>) -> Self {
        KnowledgeBase {
            members: seed.clone(),
            seed_keywords: seed,
            augmented: Vec::new(),
            rho: 0.0,
            scheme: Scheme::Ordered,
            rng_seed: 0,
        }
    }

    /// Case-insensitive membership (tokens are already lowercase).
    pub fn contains(&self, word: &str) -> bool {
        if self.members.contains(word) {
            return true;
        }
        let lower = word.to_lowercase();
        lower != word && self.members.contains(&lower)
    }

    /// All member words in sorted order.
    pub fn members(&self) -> impl Iterator<Item = &String> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sorted word -> index table over the members, used by the symbol codec.
    pub fn index(&self) -> std::collections::BTreeMap<String, usize> {
        self.members
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect()
    }
}

/// Binary keyword mask over a sentence: bit l is set iff token l is in the base.
pub fn keyword_mask(sentence: &Sentence, kb: &KnowledgeBase) -> Vec<bool> {
    sentence.tokens.iter().map(|t| kb.contains(t)).collect()
}

/// The subsequence of tokens whose mask bit is set; order and duplicates kept.
pub fn extract_keywords(sentence: &Sentence, kb: &KnowledgeBase) -> Vec<String> {
    sentence
        .tokens
        .iter()
        .filter(|t| kb.contains(t))
        .cloned()
        .collect()
}

/// Load a keyword file: one keyword per line, normalized like `tokenize`.
pub fn load_keywords(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(text.lines().flat_map(tokenize).collect())
}
