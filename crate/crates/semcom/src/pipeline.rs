//! End-to-end evaluation path: extract -> encode -> channel -> decode ->
//! regenerate -> score, plus the rho sweep that minimizes the average
//! transmitted words subject to an accuracy floor.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::channel::{
    average_costs, decode_words, encode_words, min_symbols_for, overhead_adaptive, overhead_fixed,
    transmit, ChannelConfig, CostModel, CostReport,
};
use crate::corpus::{Corpus, Sentence};
use crate::error::{Error, Result};
use crate::knowledge::{extract_keywords, KnowledgeBase, Scheme};
use crate::metrics::{bleu, sentence_similarity, BleuConfig, EmbeddingProvider};

/// Regenerates a sentence from the decoded keywords and the shared base.
pub trait SentenceGenerator {
    fn generate(&self, keywords: &[String], kb: &KnowledgeBase) -> Sentence;
}

/// Outputs the received keywords verbatim; the floor of reconstruction
/// quality.
#[derive(Debug, Clone, Copy, Default)]
pub struct EchoGenerator;

impl SentenceGenerator for EchoGenerator {
    fn generate(&self, keywords: &[String], _kb: &KnowledgeBase) -> Sentence {
        Sentence::new(0, keywords.to_vec())
    }
}

/// Inserts between consecutive received keywords the most frequent connecting
/// tokens observed in the training corpus, at most two per gap. Ties break
/// toward shorter fills, then lexicographically.
#[derive(Debug, Clone)]
pub struct BigramFillGenerator {
    gap_fills: BTreeMap<(String, String), BTreeMap<Vec<String>, usize>>,
}

impl BigramFillGenerator {
    pub fn train(corpus: &Corpus) -> Self {
        let mut gap_fills: BTreeMap<(String, String), BTreeMap<Vec<String>, usize>> =
            BTreeMap::new();
        for sentence in &corpus.sentences {
            let t = &sentence.tokens;
            for gap in 1..=2usize {
                if t.len() < gap + 2 {
                    continue;
                }
                for start in 0..t.len() - gap - 1 {
                    let key = (t[start].clone(), t[start + gap + 1].clone());
                    let fill = t[start + 1..start + 1 + gap].to_vec();
                    *gap_fills.entry(key).or_default().entry(fill).or_insert(0) += 1;
                }
            }
        }
        BigramFillGenerator { gap_fills }
    }

    fn best_fill(&self, a: &str, b: &str) -> Option<&[String]> {
        let fills = self.gap_fills.get(&(a.to_string(), b.to_string()))?;
        fills
            .iter()
            .max_by(|(fa, ca), (fb, cb)| {
                ca.cmp(cb)
                    .then_with(|| fb.len().cmp(&fa.len()))
                    .then_with(|| fb.cmp(fa))
            })
            .map(|(f, _)| f.as_slice())
    }
}

impl SentenceGenerator for BigramFillGenerator {
    fn generate(&self, keywords: &[String], _kb: &KnowledgeBase) -> Sentence {
        let mut tokens = Vec::new();
        for (i, kw) in keywords.iter().enumerate() {
            if i > 0 {
                if let Some(fill) = self.best_fill(&keywords[i - 1], kw) {
                    tokens.extend(fill.iter().cloned());
                }
            }
            tokens.push(kw.clone());
        }
        Sentence::new(0, tokens)
    }
}

/// Everything a run needs besides the corpus and the knowledge base.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub lambda: f64,
    pub n_0: usize,
    pub n_min: usize,
    pub channel: ChannelConfig,
    pub bleu: BleuConfig,
    pub cost_model: CostModel,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            lambda: 0.3,
            n_0: 4,
            n_min: 1,
            channel: ChannelConfig::default(),
            bleu: BleuConfig::default(),
            cost_model: CostModel::unit(),
        }
    }
}

/// Per-sentence outcome of one transmission.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SentenceOutcome {
    pub id: usize,
    pub length: usize,
    pub keyword_count: usize,
    pub symbols_used: usize,
    pub bleu: f64,
    pub phi: f64,
    pub delta: f64,
}

/// Aggregate report over a corpus run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub per_sentence: Vec<SentenceOutcome>,
    /// Average transmitted keywords per sentence.
    pub avg_words: f64,
    /// Mean per-sentence scores.
    pub avg_bleu: f64,
    pub avg_phi: f64,
    pub avg_delta: f64,
    /// Symbol totals: full transmission, keyword-only, adaptive.
    pub psi_0: usize,
    pub psi_tau: usize,
    pub psi_hat: usize,
    pub costs: CostReportEcho,
    pub config: ConfigEcho,
}

#[derive(Debug, Clone, Serialize)]
pub struct CostReportEcho {
    pub keyword_check: f64,
    pub transmit_proposed: f64,
    pub transmit_fixed: f64,
    pub transmit_adaptive: f64,
    pub reconstruction: f64,
    pub total_proposed: f64,
}

impl From<CostReport> for CostReportEcho {
    fn from(r: CostReport) -> Self {
        CostReportEcho {
            keyword_check: r.keyword_check,
            transmit_proposed: r.transmit_proposed,
            transmit_fixed: r.transmit_fixed,
            transmit_adaptive: r.transmit_adaptive,
            reconstruction: r.reconstruction,
            total_proposed: r.total_proposed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub rho: f64,
    pub scheme: String,
    pub lambda: f64,
    pub n_0: usize,
    pub n_min: usize,
    pub snr_db: Option<f64>,
    pub sigma: Option<f64>,
    pub channel_seed: u64,
    pub kb_seed: u64,
}

pub(crate) fn mix_seed(base: u64, id: u64) -> u64 {
    let mut x = base ^ id.wrapping_mul(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Run one sentence through the full chain.
///
/// `kb_index` must be the codec table over the base members and `n0_codec`
/// must cover it. A sentence with no keywords bypasses the channel and the
/// generator receives an empty sequence; if the reconstruction is empty, all
/// scores are 0.
#[allow(clippy::too_many_arguments)]
pub fn transmit_sentence(
    sentence: &Sentence,
    kb: &KnowledgeBase,
    kb_index: &BTreeMap<String, usize>,
    n0_codec: usize,
    config: &RunConfig,
    generator: &dyn SentenceGenerator,
    provider: &dyn EmbeddingProvider,
) -> Result<SentenceOutcome> {
    let keywords = extract_keywords(sentence, kb);
    let (decoded, symbols_used) = if keywords.is_empty() {
        (Vec::new(), 0)
    } else {
        let frame = encode_words(&keywords, kb_index, n0_codec)?;
        let mut channel = config.channel.clone();
        channel.rng_seed = mix_seed(config.channel.rng_seed, sentence.id as u64);
        let received = transmit(&frame, &channel)?;
        let decoded = decode_words(&received, kb_index, channel.gain)?;
        (decoded, frame.symbol_count())
    };
    let mut reconstructed = generator.generate(&decoded, kb);
    reconstructed.id = sentence.id;

    let (b, phi) = if reconstructed.is_empty() || sentence.is_empty() {
        (0.0, 0.0)
    } else {
        (
            bleu(sentence, &reconstructed, &config.bleu)?,
            sentence_similarity(sentence, &reconstructed, provider)?,
        )
    };
    let delta = (1.0 - config.lambda) * b + config.lambda * phi;
    Ok(SentenceOutcome {
        id: sentence.id,
        length: sentence.len(),
        keyword_count: keywords.len(),
        symbols_used,
        bleu: b,
        phi,
        delta,
    })
}

/// Apply [`transmit_sentence`] to every sentence and aggregate.
pub fn run_dataset(
    corpus: &Corpus,
    kb: &KnowledgeBase,
    config: &RunConfig,
    generator: &dyn SentenceGenerator,
    provider: &dyn EmbeddingProvider,
) -> Result<RunReport> {
    if corpus.sentence_count() == 0 {
        return Err(Error::Pipeline("empty corpus".into()));
    }
    let kb_index = kb.index();
    // the configured n_0 drives the overhead accounting; the codec widens
    // as needed so large bases stay encodable
    let n0_codec = if kb_index.is_empty() {
        config.n_0
    } else {
        config.n_0.max(min_symbols_for(kb_index.len()))
    };

    let mut per_sentence = Vec::with_capacity(corpus.sentence_count());
    let mut keyword_sets = Vec::with_capacity(corpus.sentence_count());
    for sentence in &corpus.sentences {
        keyword_sets.push(extract_keywords(sentence, kb));
        per_sentence.push(transmit_sentence(
            sentence, kb, &kb_index, n0_codec, config, generator, provider,
        )?);
    }

    let n = per_sentence.len() as f64;
    let n_tau: usize = per_sentence.iter().map(|o| o.keyword_count).sum();
    let avg_words = n_tau as f64 / n;
    let avg_bleu = per_sentence.iter().map(|o| o.bleu).sum::<f64>() / n;
    let avg_phi = per_sentence.iter().map(|o| o.phi).sum::<f64>() / n;
    let avg_delta = per_sentence.iter().map(|o| o.delta).sum::<f64>() / n;
    let costs = average_costs(
        corpus,
        &keyword_sets,
        &config.cost_model,
        config.n_min,
        config.n_0,
    )?;

    Ok(RunReport {
        avg_words,
        avg_bleu,
        avg_phi,
        avg_delta,
        psi_0: overhead_fixed(corpus.word_count, config.n_0),
        psi_tau: overhead_fixed(n_tau, config.n_0),
        psi_hat: overhead_adaptive(corpus, config.n_min, config.n_0)?,
        costs: costs.into(),
        config: ConfigEcho {
            rho: kb.rho,
            scheme: kb.scheme.to_string(),
            lambda: config.lambda,
            n_0: config.n_0,
            n_min: config.n_min,
            snr_db: config.channel.snr_db,
            sigma: config.channel.sigma,
            channel_seed: config.channel.rng_seed,
            kb_seed: kb.rng_seed,
        },
        per_sentence,
    })
}

/// Result of the rho sweep for the words-vs-accuracy minimization.
#[derive(Debug, Clone)]
pub enum SweepOutcome {
    /// Smallest grid rho whose run meets the accuracy constraint.
    Feasible {
        rho: f64,
        avg_words: f64,
        report: Box<RunReport>,
    },
    /// No grid point satisfies the constraint; carries the best achieved
    /// fraction of satisfying sentences.
    Infeasible { best_rho: f64, best_quantile: f64 },
}

/// Fraction of sentences whose semantic score meets the floor.
pub fn satisfied_fraction(report: &RunReport, tau: f64) -> f64 {
    let ok = report
        .per_sentence
        .iter()
        .filter(|o| o.delta >= tau)
        .count();
    ok as f64 / report.per_sentence.len() as f64
}

/// Sweep rho over an ascending grid and return the smallest value whose run
/// has at least a `kappa` fraction of sentences scoring >= `tau`
/// (kappa = 1 is the strict per-sentence constraint).
#[allow(clippy::too_many_arguments)]
pub fn min_words_subject_to_accuracy(
    corpus: &Corpus,
    seed_keywords: std::collections::BTreeSet<String>,
    tau: f64,
    kappa: f64,
    scheme: Scheme,
    rho_grid: &[f64],
    kb_seed: u64,
    config: &RunConfig,
    generator: &dyn SentenceGenerator,
    provider: &dyn EmbeddingProvider,
) -> Result<SweepOutcome> {
    if rho_grid.is_empty() {
        return Err(Error::Pipeline("empty rho grid".into()));
    }
    if rho_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Pipeline("rho grid must be ascending".into()));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Pipeline(format!("tau {tau} outside [0,1]")));
    }
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::Pipeline(format!("kappa {kappa} outside (0,1]")));
    }
    let mut best_rho = rho_grid[0];
    let mut best_quantile = -1.0;
    for &rho in rho_grid {
        let kb = KnowledgeBase::build(seed_keywords.clone(), corpus, rho, scheme, kb_seed)?;
        let report = run_dataset(corpus, &kb, config, generator, provider)?;
        let quantile = satisfied_fraction(&report, tau);
        if quantile >= kappa {
            return Ok(SweepOutcome::Feasible {
                rho,
                avg_words: report.avg_words,
                report: Box::new(report),
            });
        }
        if quantile > best_quantile {
            best_quantile = quantile;
            best_rho = rho;
        }
    }
    Ok(SweepOutcome::Infeasible {
        best_rho,
        best_quantile,
    })
}

/// Write the per-sentence rows as CSV: one header row, one row per sentence,
/// scores fixed at six decimals.
pub fn write_report_csv(report: &RunReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("id,length,keywords,bleu,phi,delta\n");
    for o in &report.per_sentence {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6}\n",
            o.id, o.length, o.keyword_count, o.bleu, o.phi, o.delta
        ));
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reload the per-sentence rows written by [`write_report_csv`].
pub fn read_report_csv(path: impl AsRef<Path>) -> Result<Vec<SentenceOutcome>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Pipeline(format!(
                "{}:{}: expected 6 fields",
                path.display(),
                i + 1
            )));
        }
        let bad =
            |f: &str| Error::Pipeline(format!("{}:{}: bad field '{f}'", path.display(), i + 1));
        rows.push(SentenceOutcome {
            id: fields[0].parse().map_err(|_| bad(fields[0]))?,
            length: fields[1].parse().map_err(|_| bad(fields[1]))?,
            keyword_count: fields[2].parse().map_err(|_| bad(fields[2]))?,
            symbols_used: 0,
            bleu: fields[3].parse().map_err(|_| bad(fields[3]))?,
            phi: fields[4].parse().map_err(|_| bad(fields[4]))?,
            delta: fields[5].parse().map_err(|_| bad(fields[5]))?,
        });
    }
    Ok(rows)
}

/// Summary sidecar with the aggregates, stable field order.
pub fn write_summary_json(report: &RunReport, path: impl AsRef<Path>) -> Result<()> {
    #[derive(Serialize)]
    struct Summary<'a> {
        sentences: usize,
        avg_words: f64,
        avg_bleu: f64,
        avg_phi: f64,
        avg_delta: f64,
        psi_0: usize,
        psi_tau: usize,
        psi_hat: usize,
        costs: &'a CostReportEcho,
        config: &'a ConfigEcho,
    }
    let path = path.as_ref();
    let summary = Summary {
        sentences: report.per_sentence.len(),
        avg_words: report.avg_words,
        avg_bleu: report.avg_bleu,
        avg_phi: report.avg_phi,
        avg_delta: report.avg_delta,
        psi_0: report.psi_0,
        psi_tau: report.psi_tau,
        psi_hat: report.psi_hat,
        costs: &report.costs,
        config: &report.config,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Pipeline(format!("summary serialization: {e}")))?;
    fs::write(path, json + "\n").map_err(|e| Error::io(path.display().to_string(), e))
}
