//! Word <-> symbol codec, AWGN corruption, and symbol/overhead/cost accounting.
//!
//! Each word index is Gray-coded into 2*n_0 bits and mapped onto n_0
//! unit-energy quadrature symbols (2 bits per symbol). The channel applies
//! y = h*x + eta with per-component Gaussian noise.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{word_probability, Corpus};
use crate::error::{Error, Result};

/// Token produced when a decoded index falls outside the codec table.
pub const UNKNOWN_TOKEN: &str = "<unk>";

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// AWGN channel parameters. When both `sigma` and `snr_db` are set, `sigma`
/// wins; otherwise the per-component noise deviation is derived from the SNR
/// assuming unit symbol energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub snr_db: Option<f64>,
    pub sigma: Option<f64>,
    pub gain: f64,
    pub rng_seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            snr_db: Some(6.0),
            sigma: Some(0.02),
            gain: 1.0,
            rng_seed: 0,
        }
    }
}

impl ChannelConfig {
    pub fn noiseless(seed: u64) -> Self {
        ChannelConfig {
            snr_db: None,
            sigma: Some(0.0),
            gain: 1.0,
            rng_seed: seed,
        }
    }

    pub fn from_snr_db(snr_db: f64, seed: u64) -> Self {
        ChannelConfig {
            snr_db: Some(snr_db),
            sigma: None,
            gain: 1.0,
            rng_seed: seed,
        }
    }

    /// Per-component noise standard deviation.
    pub fn noise_sigma(&self) -> Result<f64> {
        if let Some(sigma) = self.sigma {
            if sigma < 0.0 {
                return Err(Error::Channel(format!("sigma {sigma} < 0")));
            }
            return Ok(sigma);
        }
        match self.snr_db {
            Some(snr) => {
                // sigma^2 = Es / (2 * 10^(snr/10)) per real component, Es = 1
                Ok((1.0 / (2.0 * 10f64.powf(snr / 10.0))).sqrt())
            }
            None => Err(Error::Channel("neither sigma nor snr_db configured".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gain == 0.0 {
            return Err(Error::Channel("gain must be nonzero".into()));
        }
        self.noise_sigma().map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodecId {
    /// Every word uses n_0 symbols.
    FixedN0,
    /// Per-word symbol counts from the word-probability rule; high-order
    /// bits are truncated, so this codec measures overhead, not link quality.
    Adaptive,
}

/// A sequence of complex channel symbols with per-word symbol counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub symbols: Vec<Complex64>,
    pub per_word_counts: Vec<usize>,
    pub codec: CodecId,
}

impl SymbolFrame {
    pub fn symbol_count(&self) -> usize {
        self.symbols.len()
    }
}

fn gray_encode(index: usize) -> usize {
    index ^ (index >> 1)
}

fn gray_decode(gray: usize) -> usize {
    let mut index = gray;
    let mut shift = gray >> 1;
    while shift > 0 {
        index ^= shift;
        shift >>= 1;
    }
    index
}

/// Two Gray bits per symbol: the low bit sets the I sign, the high bit the
/// Q sign, both at amplitude 1/sqrt(2) for unit symbol energy.
fn bits_to_symbol(bit_pair: usize) -> Complex64 {
    let re = if bit_pair & 1 == 0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    let im = if bit_pair & 2 == 0 {
        FRAC_1_SQRT_2
    } else {
        -FRAC_1_SQRT_2
    };
    Complex64::new(re, im)
}

fn symbol_to_bits(symbol: Complex64) -> usize {
    let mut bits = 0;
    if symbol.re < 0.0 {
        bits |= 1;
    }
    if symbol.im < 0.0 {
        bits |= 2;
    }
    bits
}

fn encode_index(gray: usize, symbol_count: usize, out: &mut Vec<Complex64>) {
    for k in (0..symbol_count).rev() {
        out.push(bits_to_symbol((gray >> (2 * k)) & 3));
    }
}

/// Encode each word with n_0 symbols via its Gray-coded table index.
pub fn encode_words(
    words: &[String],
    kb_index: &BTreeMap<String, usize>,
    n_0: usize,
) -> Result<SymbolFrame> {
    if n_0 == 0 {
        return Err(Error::Channel("n_0 must be >= 1".into()));
    }
    let capacity = index_capacity(n_0);
    let mut symbols = Vec::with_capacity(words.len() * n_0);
    for word in words {
        let &index = kb_index
            .get(word)
            .ok_or_else(|| Error::Channel(format!("word '{word}' not in codec index")))?;
        if index >= capacity {
            return Err(Error::Channel(format!(
                "index {index} overflows {n_0}-symbol codec (capacity {capacity})"
            )));
        }
        encode_index(gray_encode(index), n_0, &mut symbols);
    }
    Ok(SymbolFrame {
        symbols,
        per_word_counts: vec![n_0; words.len()],
        codec: CodecId::FixedN0,
    })
}

/// Encode with a per-word symbol count; indices wider than 2*count bits are
/// truncated to their low-order bits.
pub fn encode_words_adaptive(
    words: &[String],
    kb_index: &BTreeMap<String, usize>,
    counts: &[usize],
) -> Result<SymbolFrame> {
    if words.len() != counts.len() {
        return Err(Error::Channel("words/counts length mismatch".into()));
    }
    let mut symbols = Vec::new();
    for (word, &count) in words.iter().zip(counts) {
        if count == 0 {
            return Err(Error::Channel("symbol count must be >= 1".into()));
        }
        let &index = kb_index
            .get(word)
            .ok_or_else(|| Error::Channel(format!("word '{word}' not in codec index")))?;
        let mask = index_capacity(count) - 1;
        encode_index(gray_encode(index) & mask, count, &mut symbols);
    }
    Ok(SymbolFrame {
        symbols,
        per_word_counts: counts.to_vec(),
        codec: CodecId::Adaptive,
    })
}

/// Number of distinct indices an n-symbol codeword can carry (4^n).
pub fn index_capacity(n_symbols: usize) -> usize {
    1usize << (2 * n_symbols).min(usize::BITS as usize - 1)
}

/// Smallest n_0 whose index space covers `table_size` entries.
pub fn min_symbols_for(table_size: usize) -> usize {
    let mut n = 1;
    while index_capacity(n) < table_size {
        n += 1;
    }
    n
}

/// Apply y = h*x + eta with seeded per-component Gaussian noise.
pub fn transmit(frame: &SymbolFrame, config: &ChannelConfig) -> Result<SymbolFrame> {
    config.validate()?;
    let sigma = config.noise_sigma()?;
    let mut out = frame.clone();
    if sigma == 0.0 {
        for s in &mut out.symbols {
            *s *= config.gain;
        }
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Channel(e.to_string()))?;
    for s in &mut out.symbols {
        let noise = Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        *s = *s * config.gain + noise;
    }
    Ok(out)
}

/// Nearest-point decisions per symbol (after removing the gain), bits
/// reassembled and Gray-decoded into table indices. Indices outside the
/// table map to [`UNKNOWN_TOKEN`].
pub fn decode_words(
    frame: &SymbolFrame,
    kb_index: &BTreeMap<String, usize>,
    gain: f64,
) -> Result<Vec<String>> {
    if gain == 0.0 {
        return Err(Error::Channel("gain must be nonzero".into()));
    }
    let total: usize = frame.per_word_counts.iter().sum();
    if total != frame.symbols.len() {
        return Err(Error::Channel(
            "per-word counts do not cover the frame".into(),
        ));
    }
    let reverse: BTreeMap<usize, &String> = kb_index.iter().map(|(w, &i)| (i, w)).collect();
    let mut words = Vec::with_capacity(frame.per_word_counts.len());
    let mut pos = 0;
    for &count in &frame.per_word_counts {
        let mut gray = 0usize;
        for k in 0..count {
            let sym = frame.symbols[pos + k] / gain;
            gray = (gray << 2) | symbol_to_bits(sym);
        }
        pos += count;
        let index = gray_decode(gray);
        words.push(match reverse.get(&index) {
            Some(w) => (*w).clone(),
            None => UNKNOWN_TOKEN.to_string(),
        });
    }
    Ok(words)
}

/// Per-word symbol count for the adaptive scheme:
/// min(max(n_min, floor(n_0 * N_0 * p + 0.5)), n_0).
pub fn adaptive_symbol_count(p: f64, n_min: usize, n_0: usize, big_n0: usize) -> Result<usize> {
    if n_min == 0 {
        return Err(Error::Channel("n_min must be >= 1".into()));
    }
    if n_min >= n_0 {
        return Err(Error::Channel(format!("n_min {n_min} must be < n_0 {n_0}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Channel(format!("probability {p} outside [0,1]")));
    }
    let raw = (n_0 as f64 * big_n0 as f64 * p + 0.5).floor();
    let clipped = raw.max(n_min as f64).min(n_0 as f64);
    Ok(clipped as usize)
}

/// Total symbols for a fixed-rate scheme: n_0 * word_count.
pub fn overhead_fixed(word_count: usize, n_0: usize) -> usize {
    n_0 * word_count
}

/// Total symbols under the adaptive per-word rule, summed over the corpus.
pub fn overhead_adaptive(corpus: &Corpus, n_min: usize, n_0: usize) -> Result<usize> {
    let probs = word_probability(corpus)?;
    let big_n0 = corpus.word_count;
    let mut total = 0;
    for sentence in &corpus.sentences {
        for token in &sentence.tokens {
            total += adaptive_symbol_count(probs[token], n_min, n_0, big_n0)?;
        }
    }
    Ok(total)
}

/// Symbols-per-word-transmitted figures for the three schemes
/// (fixed full transmission, adaptive, keyword-only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaValues {
    pub deepsc: f64,
    pub adaptive: f64,
    pub proposed: f64,
}

pub fn alpha_values(
    n0_of_tau: f64,
    psi_hat_of_tau: f64,
    big_n0: usize,
    n_tau: usize,
) -> Result<AlphaValues> {
    if big_n0 == 0 {
        return Err(Error::Channel("N_0 must be > 0".into()));
    }
    Ok(AlphaValues {
        deepsc: n0_of_tau,
        adaptive: psi_hat_of_tau / big_n0 as f64,
        proposed: n0_of_tau * n_tau as f64 / big_n0 as f64,
    })
}

/// Costs for keyword checking, symbol transmission, and sentence
/// reconstruction. Word costs may be overridden per word; symbol and
/// reconstruction costs are flat rates.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub word_costs: BTreeMap<String, f64>,
    pub default_word_cost: f64,
    pub symbol_cost: f64,
    pub reconstruction_cost: f64,
}

impl CostModel {
    pub fn unit() -> Self {
        CostModel {
            word_costs: BTreeMap::new(),
            default_word_cost: 1.0,
            symbol_cost: 1.0,
            reconstruction_cost: 1.0,
        }
    }

    pub fn word_cost(&self, word: &str) -> f64 {
        self.word_costs
            .get(word)
            .copied()
            .unwrap_or(self.default_word_cost)
    }

    /// Load a cost model file with `[words]`, `[symbol]`, and
    /// `[reconstruction]` sections. In `[words]`, a line is `word cost`;
    /// the key `default` sets the fallback word cost. The other two sections
    /// hold a single nonnegative number.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut model = CostModel {
            word_costs: BTreeMap::new(),
            default_word_cost: 0.0,
            symbol_cost: 0.0,
            reconstruction_cost: 0.0,
        };
        let mut section = String::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].to_string();
                continue;
            }
            let parse = |v: &str| -> Result<f64> {
                let x: f64 = v.parse().map_err(|_| {
                    Error::Channel(format!("{}:{}: bad number '{v}'", path.display(), i + 1))
                })?;
                if x < 0.0 {
                    return Err(Error::Channel(format!(
                        "{}:{}: cost must be nonnegative",
                        path.display(),
                        i + 1
                    )));
                }
                Ok(x)
            };
            match section.as_str() {
                "words" => {
                    let mut parts = line.split_whitespace();
                    let word = parts.next().unwrap().to_lowercase();
                    let cost = parse(parts.next().ok_or_else(|| {
                        Error::Channel(format!("{}:{}: missing cost", path.display(), i + 1))
                    })?)?;
                    if word == "default" {
                        model.default_word_cost = cost;
                    } else {
                        model.word_costs.insert(word, cost);
                    }
                }
                "symbol" => model.symbol_cost = parse(line)?,
                "reconstruction" => model.reconstruction_cost = parse(line)?,
                other => {
                    return Err(Error::Channel(format!(
                        "{}:{}: unknown section '{other}'",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
        Ok(model)
    }
}

/// Average per-sentence costs for the three schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    /// Keyword-extraction cost C_k.
    pub keyword_check: f64,
    /// Transmission cost of the keyword-only scheme, C_t^p.
    pub transmit_proposed: f64,
    /// Transmission cost of full fixed-rate transmission, C_t^d.
    pub transmit_fixed: f64,
    /// Transmission cost of the adaptive scheme, C_t^a.
    pub transmit_adaptive: f64,
    /// Sentence reconstruction cost C_r.
    pub reconstruction: f64,
    /// End-to-end cost of the keyword-only scheme, C_k + C_t^p + C_r.
    pub total_proposed: f64,
}

/// Compute the average cost report over a corpus and its per-sentence
/// keyword sets.
pub fn average_costs(
    corpus: &Corpus,
    keyword_sets: &[Vec<String>],
    model: &CostModel,
    n_min: usize,
    n_0: usize,
) -> Result<CostReport> {
    if keyword_sets.len() != corpus.sentence_count() {
        return Err(Error::Channel(format!(
            "keyword sets ({}) do not match corpus sentences ({})",
            keyword_sets.len(),
            corpus.sentence_count()
        )));
    }
    let n = corpus.sentence_count();
    if n == 0 {
        return Err(Error::Channel("empty corpus".into()));
    }
    let n_f = n as f64;
    let probs = word_probability(corpus)?;

    let mut keyword_check = 0.0;
    let mut fixed_symbols = 0.0;
    let mut adaptive_cost = 0.0;
    for sentence in &corpus.sentences {
        for token in &sentence.tokens {
            keyword_check += model.word_cost(token);
            fixed_symbols += model.symbol_cost;
            let q = adaptive_symbol_count(probs[token], n_min, n_0, corpus.word_count)?;
            adaptive_cost += q as f64 * model.symbol_cost;
        }
    }
    let proposed_symbols: f64 = keyword_sets
        .iter()
        .map(|kws| kws.len() as f64 * model.symbol_cost)
        .sum();

    let keyword_check = keyword_check / n_f;
    let transmit_proposed = n_0 as f64 * proposed_symbols / n_f;
    let transmit_fixed = n_0 as f64 * fixed_symbols / n_f;
    let transmit_adaptive = adaptive_cost / n_f;
    let reconstruction = model.reconstruction_cost;
    Ok(CostReport {
        keyword_check,
        transmit_proposed,
        transmit_fixed,
        transmit_adaptive,
        reconstruction,
        total_proposed: keyword_check + transmit_proposed + reconstruction,
    })
}
