//! Sentence scoring: modified n-gram precision, brevity penalty, BLEU,
//! embedding similarity, and the combined semantic score.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// Weights for the n-gram precisions entering the BLEU geometric mean.
#[derive(Debug, Clone, PartialEq)]
pub struct BleuConfig {
    pub weights: Vec<f64>,
}

impl BleuConfig {
    /// Uniform weights over n-grams up to `max_n`.
    pub fn uniform(max_n: usize) -> Result<Self> {
        if max_n == 0 {
            return Err(Error::Metrics("max_n must be >= 1".into()));
        }
        Ok(BleuConfig {
            weights: vec![1.0 / max_n as f64; max_n],
        })
    }

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Metrics("empty weight vector".into()));
        }
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::Metrics("weights must be nonnegative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Metrics(format!("weights sum to {sum}, expected 1")));
        }
        Ok(BleuConfig { weights })
    }

    pub fn max_n(&self) -> usize {
        self.weights.len()
    }
}

impl Default for BleuConfig {
    /// 1-gram BLEU, used when nothing else is specified.
    fn default() -> Self {
        BleuConfig { weights: vec![1.0] }
    }
}

/// Modified n-gram precision as a (matched, total) pair over candidate
/// n-grams. Candidate n-gram counts are clipped by the reference counts.
/// A candidate shorter than n yields denominator 0; callers must not divide.
pub fn modified_precision(
    reference: &Sentence,
    candidate: &Sentence,
    n: usize,
) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(Error::Metrics("n must be >= 1".into()));
    }
    fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
        let mut m: HashMap<&[String], usize> = HashMap::new();
        if tokens.len() >= n {
            for g in tokens.windows(n) {
                *m.entry(g).or_insert(0) += 1;
            }
        }
        m
    }
    let cand = ngram_counts(&candidate.tokens, n);
    let refr = ngram_counts(&reference.tokens, n);
    let total: usize = cand.values().sum();
    let matched: usize = cand
        .iter()
        .map(|(g, &c)| c.min(refr.get(g).copied().unwrap_or(0)))
        .sum();
    Ok((matched, total))
}

/// Brevity penalty: 1 when the candidate is longer than the reference,
/// otherwise exp(1 - ref_len / cand_len).
pub fn brevity_penalty(candidate_len: usize, reference_len: usize) -> Result<f64> {
    if candidate_len == 0 {
        return Err(Error::Metrics("empty candidate".into()));
    }
    if candidate_len > reference_len {
        Ok(1.0)
    } else {
        Ok((1.0 - reference_len as f64 / candidate_len as f64).exp())
    }
}

/// BLEU score between a reference and a candidate sentence.
///
/// Returns 0 when any weighted n-gram precision has a zero numerator or
/// denominator, which keeps the score defined on [0,1].
pub fn bleu(reference: &Sentence, candidate: &Sentence, config: &BleuConfig) -> Result<f64> {
    if candidate.is_empty() {
        return Err(Error::Metrics("empty candidate".into()));
    }
    let mut log_sum = 0.0;
    for (i, &w) in config.weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let (num, den) = modified_precision(reference, candidate, i + 1)?;
        if num == 0 || den == 0 {
            return Ok(0.0);
        }
        log_sum += w * (num as f64 / den as f64).ln();
    }
    let bp = brevity_penalty(candidate.len(), reference.len())?;
    Ok(bp * log_sum.exp())
}

/// Maps a sentence to a fixed-dimension real vector.
pub trait EmbeddingProvider {
    fn dimension(&self) -> usize;
    fn embed(&self, sentence: &Sentence) -> Vec<f64>;
}

/// Deterministic bag-of-words embedding: each word hashes to a fixed
/// sign vector and the sentence embedding is the token-wise sum.
/// Hashing is pure integer arithmetic, so the output is bit-identical
/// across platforms for a given seed.
#[derive(Debug, Clone)]
pub struct HashedBowProvider {
    dimension: usize,
    seed: u64,
}

impl HashedBowProvider {
    pub fn new(dimension: usize, seed: u64) -> Self {
        HashedBowProvider { dimension, seed }
    }

    fn word_signs(&self, word: &str) -> Vec<f64> {
        let mut state = self.seed ^ 0x9e3779b97f4a7c15;
        for &b in word.as_bytes() {
            state = splitmix64(state ^ b as u64);
        }
        let mut out = Vec::with_capacity(self.dimension);
        let mut bits = 0u64;
        for i in 0..self.dimension {
            if i % 64 == 0 {
                state = splitmix64(state);
                bits = state;
            }
            out.push(if bits & 1 == 1 { 1.0 } else { -1.0 });
            bits >>= 1;
        }
        out
    }
}

impl Default for HashedBowProvider {
    fn default() -> Self {
        HashedBowProvider::new(256, 0)
    }
}

impl EmbeddingProvider for HashedBowProvider {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, sentence: &Sentence) -> Vec<f64> {
        let mut acc = vec![0.0; self.dimension];
        for token in &sentence.tokens {
            for (a, s) in acc.iter_mut().zip(self.word_signs(token)) {
                *a += s;
            }
        }
        acc
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Word-vector table loaded from disk; sentence embedding is the sum of the
/// vectors of its known tokens. Unknown tokens contribute nothing.
#[derive(Debug, Clone)]
pub struct TableProvider {
    dimension: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl TableProvider {
    /// Load lines of the form `word v1 v2 ... vD`. The dimension is inferred
    /// from the first line; a mismatch on a later line is an error.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut vectors = BTreeMap::new();
        let mut dimension = None;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap().to_lowercase();
            let vec: Vec<f64> = parts
                .map(|v| {
                    v.parse::<f64>().map_err(|_| {
                        Error::Metrics(format!("{}:{}: bad number '{v}'", path.display(), i + 1))
                    })
                })
                .collect::<Result<_>>()?;
            match dimension {
                None => dimension = Some(vec.len()),
                Some(d) if d != vec.len() => {
                    return Err(Error::Metrics(format!(
                        "{}:{}: dimension {} does not match {}",
                        path.display(),
                        i + 1,
                        vec.len(),
                        d
                    )))
                }
                _ => {}
            }
            vectors.insert(word, vec);
        }
        let dimension =
            dimension.ok_or_else(|| Error::Metrics(format!("{}: empty table", path.display())))?;
        Ok(TableProvider { dimension, vectors })
    }
}

impl EmbeddingProvider for TableProvider {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, sentence: &Sentence) -> Vec<f64> {
        let mut acc = vec![0.0; self.dimension];
        for token in &sentence.tokens {
            if let Some(v) = self.vectors.get(token) {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
            }
        }
        acc
    }
}

/// Cosine similarity of the two sentence embeddings, clamped to [0,1].
pub fn sentence_similarity(
    s: &Sentence,
    s_hat: &Sentence,
    provider: &dyn EmbeddingProvider,
) -> Result<f64> {
    if s.is_empty() || s_hat.is_empty() {
        return Err(Error::Metrics("empty sentence".into()));
    }
    let a = provider.embed(s);
    let b = provider.embed(s_hat);
    let norm_a = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let norm_b = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(Error::Metrics("degenerate embedding".into()));
    }
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    Ok((dot / (norm_a * norm_b)).clamp(0.0, 1.0))
}

/// Semantic score: (1 - lambda) * BLEU + lambda * cosine similarity.
pub fn semantic_score(
    s: &Sentence,
    s_hat: &Sentence,
    lambda: f64,
    config: &BleuConfig,
    provider: &dyn EmbeddingProvider,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) || lambda.is_nan() {
        return Err(Error::Metrics(format!("lambda {lambda} outside [0,1]")));
    }
    let b = bleu(s, s_hat, config)?;
    let phi = sentence_similarity(s, s_hat, provider)?;
    Ok((1.0 - lambda) * b + lambda * phi)
}
