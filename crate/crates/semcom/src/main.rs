//! Command-line front end: corpus statistics, knowledge-base construction,
//! end-to-end channel runs and sweeps, BLEU scoring, and the allocation
//! solvers. Identical arguments and seeds produce byte-identical outputs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semcom::channel::{ChannelConfig, CostModel};
use semcom::corpus::{frequency_ranked, load_corpus, tokenize, Corpus};
use semcom::dap;
use semcom::dap::ensemble::{simulate_ensemble, write_ensemble_csv, EnsembleParams};
use semcom::knowledge::{load_keywords, KnowledgeBase, Scheme};
use semcom::metrics::{bleu, BleuConfig, EmbeddingProvider, HashedBowProvider, TableProvider};
use semcom::pipeline::{
    run_dataset, satisfied_fraction, write_report_csv, write_summary_json, BigramFillGenerator,
    EchoGenerator, RunConfig, SentenceGenerator,
};
use semcom::{Error, Result};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "SEMCOM_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "semcom",
    version,
    about = "Keyword-based transmission simulator and data-allocation solvers"
)]
struct Cli {
    /// Output directory for generated files [env: SEMCOM_OUT_DIR, default: .]
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus inspection
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
    /// Knowledge-base construction
    Kb {
        #[command(subcommand)]
        command: KbCommand,
    },
    /// End-to-end transmission experiments
    Semcom {
        #[command(subcommand)]
        command: SemcomCommand,
    },
    /// Sentence scoring
    Metrics {
        #[command(subcommand)]
        command: MetricsCommand,
    },
    /// Data allocation problem
    Dap {
        #[command(subcommand)]
        command: DapCommand,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Tokenize a corpus and write its vocabulary frequency table
    Stats {
        /// Corpus file, one sentence per line
        #[arg(long)]
        corpus: PathBuf,
    },
}

#[derive(Subcommand)]
enum KbCommand {
    /// Build a knowledge base from seed keywords and corpus augmentation
    Build {
        #[arg(long)]
        corpus: PathBuf,
        /// Seed keyword file, one keyword per line
        #[arg(long)]
        keywords: Option<PathBuf>,
        /// Fraction of the vocabulary to add
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        #[arg(long, default_value = "ordered")]
        scheme: Scheme,
        /// Seed for the random augmentation order
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct RunFlags {
    #[arg(long)]
    corpus: PathBuf,
    /// Seed keyword file, one keyword per line
    #[arg(long)]
    keywords: Option<PathBuf>,
    /// Fraction of the vocabulary added to the base
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value = "ordered")]
    scheme: Scheme,
    /// Seed for the augmentation order
    #[arg(long, default_value_t = 0)]
    kb_seed: u64,
    /// Weight of embedding similarity in the combined score
    #[arg(long, default_value_t = 0.3)]
    lambda: f64,
    /// Channel signal-to-noise ratio in dB (ignored when --sigma is given)
    #[arg(long)]
    snr_db: Option<f64>,
    /// Per-component noise standard deviation; overrides --snr-db
    #[arg(long)]
    sigma: Option<f64>,
    /// Symbols per word for fixed-rate encoding
    #[arg(long, default_value_t = 4)]
    n0: usize,
    /// Minimum symbols per word for adaptive encoding
    #[arg(long, default_value_t = 1)]
    nmin: usize,
    /// Channel noise seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = GeneratorKind::Echo)]
    generator: GeneratorKind,
    /// Word-embedding table file; hashed bag-of-words when absent
    #[arg(long)]
    embedding: Option<PathBuf>,
    /// Cost model file; unit costs when absent
    #[arg(long)]
    cost_model: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SemcomCommand {
    /// Transmit every sentence once and write per-sentence scores
    Run {
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Find the smallest rho meeting an accuracy floor over a grid
    Sweep {
        #[command(flatten)]
        flags: RunFlags,
        /// Per-sentence accuracy floor
        #[arg(long)]
        tau: f64,
        /// Required fraction of sentences meeting the floor
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Ascending rho grid
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0"
        )]
        rho_grid: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum MetricsCommand {
    /// Print the BLEU score of a candidate against a reference
    Bleu {
        /// Reference sentence
        #[arg(long = "ref")]
        reference: String,
        /// Candidate sentence
        #[arg(long = "cand")]
        candidate: String,
        /// Highest n-gram order, uniformly weighted
        #[arg(long, default_value_t = 1)]
        max_n: usize,
    },
}

#[derive(Subcommand)]
enum DapCommand {
    /// Solve one instance file
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Greedy)]
        algo: Algo,
    },
    /// Monte Carlo comparison of the solvers over random instances
    Ensemble {
        /// User counts, comma separated
        #[arg(long, value_delimiter = ',', default_value = "500,900,1300,1700,2100")]
        j_grid: Vec<usize>,
        /// Sell-cost discount factors in [0,1), comma separated
        #[arg(long, value_delimiter = ',', default_value = "0.0")]
        discount_grid: Vec<f64>,
        #[arg(long, default_value_t = 25)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of data categories
        #[arg(long, default_value_t = 20)]
        categories: usize,
        /// Storage capacity in GB
        #[arg(long, default_value_t = 64000.0)]
        capacity: f64,
        /// Also run the exact solver (small instances only)
        #[arg(long)]
        exact: bool,
    },
    /// Build the allocation instance of a knapsack problem and solve exactly
    ReduceKp {
        /// Item values, strictly increasing
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Item weights, strictly increasing
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        #[arg(long)]
        capacity: f64,
        /// Items to pick (exactly one per user)
        #[arg(long)]
        users: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GeneratorKind {
    Echo,
    Bigram,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Greedy,
    GreedyCost,
    Exact,
}

fn out_dir(cli_flag: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = cli_flag
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    Ok(dir)
}

fn load_seed_keywords(path: &Option<PathBuf>) -> Result<BTreeSet<String>> {
    match path {
        Some(p) => load_keywords(p),
        None => Ok(BTreeSet::new()),
    }
}

fn channel_from_flags(flags: &RunFlags) -> ChannelConfig {
    if flags.snr_db.is_none() && flags.sigma.is_none() {
        return ChannelConfig {
            rng_seed: flags.seed,
            ..ChannelConfig::default()
        };
    }
    ChannelConfig {
        snr_db: flags.snr_db,
        sigma: flags.sigma,
        gain: 1.0,
        rng_seed: flags.seed,
    }
}

fn run_config(flags: &RunFlags) -> Result<RunConfig> {
    let cost_model = match &flags.cost_model {
        Some(p) => CostModel::load(p)?,
        None => CostModel::unit(),
    };
    let config = RunConfig {
        lambda: flags.lambda,
        n_0: flags.n0,
        n_min: flags.nmin,
        channel: channel_from_flags(flags),
        bleu: BleuConfig::default(),
        cost_model,
    };
    if !(0.0..=1.0).contains(&config.lambda) {
        return Err(Error::Pipeline(format!(
            "lambda {} outside [0,1]",
            config.lambda
        )));
    }
    if config.n_0 == 0 || config.n_min == 0 || config.n_min > config.n_0 {
        return Err(Error::Pipeline(format!(
            "need 1 <= nmin <= n0, got nmin = {}, n0 = {}",
            config.n_min, config.n_0
        )));
    }
    config.channel.validate()?;
    Ok(config)
}

fn build_provider(flags: &RunFlags) -> Result<Box<dyn EmbeddingProvider>> {
    Ok(match &flags.embedding {
        Some(p) => Box::new(TableProvider::load(p)?),
        None => Box::new(HashedBowProvider::default()),
    })
}

fn build_generator(kind: GeneratorKind, corpus: &Corpus) -> Box<dyn SentenceGenerator> {
    match kind {
        GeneratorKind::Echo => Box::new(EchoGenerator),
        GeneratorKind::Bigram => Box::new(BigramFillGenerator::train(corpus)),
    }
}

fn build_kb(flags: &RunFlags, corpus: &Corpus) -> Result<KnowledgeBase> {
    let seed = load_seed_keywords(&flags.keywords)?;
    KnowledgeBase::build(seed, corpus, flags.rho, flags.scheme, flags.kb_seed)
}

fn cmd_corpus_stats(out: &Path, corpus_path: &Path) -> Result<()> {
    let corpus = load_corpus(corpus_path)?;
    let mut csv = String::from("word,count\n");
    for (word, count) in frequency_ranked(&corpus) {
        csv.push_str(&format!("{word},{count}\n"));
    }
    let path = out.join("vocabulary.csv");
    std::fs::write(&path, csv).map_err(|e| Error::io(path.display().to_string(), e))?;
    println!(
        "sentences {} words {} vocabulary {} -> {}",
        corpus.sentence_count(),
        corpus.word_count,
        corpus.vocabulary_size(),
        path.display()
    );
    Ok(())
}

fn cmd_kb_build(
    out: &Path,
    corpus_path: &Path,
    keywords: &Option<PathBuf>,
    rho: f64,
    scheme: Scheme,
    seed: u64,
) -> Result<()> {
    let corpus = load_corpus(corpus_path)?;
    let seed_words = load_seed_keywords(keywords)?;
    let kb = KnowledgeBase::build(seed_words, &corpus, rho, scheme, seed)?;
    let mut text = String::new();
    for w in kb.members() {
        text.push_str(w);
        text.push('\n');
    }
    let path = out.join("kb.txt");
    std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))?;
    println!(
        "kb members {} (seed {} augmented {}) scheme {} rho {:.6} -> {}",
        kb.len(),
        kb.seed_keywords.len(),
        kb.augmented.len(),
        scheme,
        rho,
        path.display()
    );
    Ok(())
}

fn cmd_semcom_run(out: &Path, flags: &RunFlags) -> Result<()> {
    let corpus = load_corpus(&flags.corpus)?;
    let kb = build_kb(flags, &corpus)?;
    let config = run_config(flags)?;
    let provider = build_provider(flags)?;
    let generator = build_generator(flags.generator, &corpus);
    let report = run_dataset(&corpus, &kb, &config, generator.as_ref(), provider.as_ref())?;

    let csv_path = out.join("run.csv");
    let json_path = out.join("summary.json");
    write_report_csv(&report, &csv_path)?;
    write_summary_json(&report, &json_path)?;
    println!(
        "sentences {} avg_words {:.6} avg_bleu {:.6} avg_phi {:.6} avg_delta {:.6} -> {}, {}",
        report.per_sentence.len(),
        report.avg_words,
        report.avg_bleu,
        report.avg_phi,
        report.avg_delta,
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

fn cmd_semcom_sweep(
    out: &Path,
    flags: &RunFlags,
    tau: f64,
    kappa: f64,
    rho_grid: &[f64],
) -> Result<()> {
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
    let corpus = load_corpus(&flags.corpus)?;
    let seed_words = load_seed_keywords(&flags.keywords)?;
    let config = run_config(flags)?;
    let provider = build_provider(flags)?;
    let generator = build_generator(flags.generator, &corpus);

    let mut csv = String::from("rho,avg_words,avg_bleu,avg_phi,avg_delta,satisfied\n");
    let mut chosen: Option<(f64, f64)> = None;
    let mut best: (f64, f64) = (rho_grid[0], -1.0);
    for &rho in rho_grid {
        let kb = KnowledgeBase::build(
            seed_words.clone(),
            &corpus,
            rho,
            flags.scheme,
            flags.kb_seed,
        )?;
        let report = run_dataset(&corpus, &kb, &config, generator.as_ref(), provider.as_ref())?;
        let satisfied = satisfied_fraction(&report, tau);
        csv.push_str(&format!(
            "{rho:.6},{:.6},{:.6},{:.6},{:.6},{satisfied:.6}\n",
            report.avg_words, report.avg_bleu, report.avg_phi, report.avg_delta
        ));
        if chosen.is_none() && satisfied >= kappa {
            chosen = Some((rho, report.avg_words));
        }
        if satisfied > best.1 {
            best = (rho, satisfied);
        }
    }
    let path = out.join("sweep.csv");
    std::fs::write(&path, csv).map_err(|e| Error::io(path.display().to_string(), e))?;
    match chosen {
        Some((rho, avg_words)) => println!(
            "feasible rho {rho:.6} avg_words {avg_words:.6} -> {}",
            path.display()
        ),
        None => println!(
            "infeasible: best rho {:.6} satisfied {:.6} -> {}",
            best.0,
            best.1,
            path.display()
        ),
    }
    Ok(())
}

fn cmd_metrics_bleu(reference: &str, candidate: &str, max_n: usize) -> Result<()> {
    let r = semcom::corpus::Sentence::new(0, tokenize(reference));
    let c = semcom::corpus::Sentence::new(1, tokenize(candidate));
    let config = BleuConfig::uniform(max_n)?;
    println!("{:.6}", bleu(&r, &c, &config)?);
    Ok(())
}

fn cmd_dap_solve(instance_path: &Path, algo: Algo) -> Result<()> {
    let instance = dap::read_instance(instance_path)?;
    let allocation = match algo {
        Algo::Greedy => dap::greedy_allocate(&instance)?,
        Algo::GreedyCost => dap::greedy_cost_allocate(&instance)?,
        Algo::Exact => dap::exact_allocate(&instance)?,
    };
    let profit = dap::profit(&instance, &allocation)?;
    let assignment: Vec<String> = allocation
        .assignment
        .iter()
        .map(|i| (i + 1).to_string())
        .collect();
    println!("profit {profit:.6} assignment {}", assignment.join(","));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_dap_ensemble(
    out: &Path,
    j_grid: Vec<usize>,
    discount_grid: Vec<f64>,
    iters: usize,
    seed: u64,
    categories: usize,
    capacity: f64,
    exact: bool,
) -> Result<()> {
    let params = EnsembleParams {
        category_count: categories,
        user_grid: j_grid,
        capacity,
        discount_grid,
        iterations: iters,
        run_exact: exact,
        ..EnsembleParams::default()
    };
    let report = simulate_ensemble(&params, seed)?;
    let path = out.join("ensemble.csv");
    write_ensemble_csv(&report, &path)?;
    println!(
        "cells {} iterations {} -> {}",
        report.cells.len(),
        iters,
        path.display()
    );
    Ok(())
}

fn cmd_dap_reduce_kp(
    out: &Path,
    values: &[f64],
    weights: &[f64],
    capacity: f64,
    users: usize,
) -> Result<()> {
    let instance = dap::reduce_knapsack(values, weights, capacity, users)?;
    let path = out.join("kp_instance.txt");
    dap::write_instance(&instance, &path)?;
    let allocation = dap::exact_allocate(&instance)?;
    let profit = dap::profit(&instance, &allocation)?;
    println!("profit {profit:.6} -> {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let out = out_dir(&cli.out)?;
    match cli.command {
        Command::Corpus {
            command: CorpusCommand::Stats { corpus },
        } => cmd_corpus_stats(&out, &corpus),
        Command::Kb {
            command:
                KbCommand::Build {
                    corpus,
                    keywords,
                    rho,
                    scheme,
                    seed,
                },
        } => cmd_kb_build(&out, &corpus, &keywords, rho, scheme, seed),
        Command::Semcom { command } => match command {
            SemcomCommand::Run { flags } => cmd_semcom_run(&out, &flags),
            SemcomCommand::Sweep {
                flags,
                tau,
                kappa,
                rho_grid,
            } => cmd_semcom_sweep(&out, &flags, tau, kappa, &rho_grid),
        },
        Command::Metrics {
            command:
                MetricsCommand::Bleu {
                    reference,
                    candidate,
                    max_n,
                },
        } => cmd_metrics_bleu(&reference, &candidate, max_n),
        Command::Dap { command } => match command {
            DapCommand::Solve { instance, algo } => cmd_dap_solve(&instance, algo),
            DapCommand::Ensemble {
                j_grid,
                discount_grid,
                iters,
                seed,
                categories,
                capacity,
                exact,
            } => cmd_dap_ensemble(
                &out,
                j_grid,
                discount_grid,
                iters,
                seed,
                categories,
                capacity,
                exact,
            ),
            DapCommand::ReduceKp {
                values,
                weights,
                capacity,
                users,
            } => cmd_dap_reduce_kp(&out, &values, &weights, capacity, users),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
