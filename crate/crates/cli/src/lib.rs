//! The `lextopic` command line: `ingest`, `fit`, `sweep` and `analyze`.

pub mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use lextopic_core::analyze::{self, AnalyzeError, ReportOptions};
use lextopic_core::corpus::{self, Corpus, CorpusError};
use lextopic_core::lda::{self, LdaError, LdaModel};
use lextopic_core::preprocess::{self, LemmaRules, PreprocessConfig, PreprocessError};
use lextopic_core::vectorize::{self, DocTermMatrix, VectorizeError, Vocabulary};
use thiserror::Error;

pub use config::{Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("preprocess: {0}")]
    Preprocess(#[from] PreprocessError),
    #[error("vectorize: {0}")]
    Vectorize(#[from] VectorizeError),
    #[error("lda: {0}")]
    Lda(#[from] LdaError),
    #[error("analyze: {0}")]
    Analyze(#[from] AnalyzeError),
    #[error("output: {path}: {message}")]
    Output { path: PathBuf, message: String },
}

#[derive(Debug, Parser)]
#[command(name = "lextopic", version, about = "Topic models for legal document collections")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, env = "LEXTOPIC_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a corpus and write per-type yearly counts and length ratios.
    Ingest(Overrides),
    /// Preprocess, vectorize and fit a model.
    Fit {
        #[command(flatten)]
        overrides: Overrides,
        /// Independent chains (seeds seed, seed+1, ...).
        #[arg(long)]
        chains: Option<usize>,
    },
    /// Fit one model per topic count and tabulate coherence and perplexity.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated topic counts.
        #[arg(long, value_delimiter = ',', required = true)]
        ks: Vec<usize>,
    },
    /// Write topic summaries, shares, trends and word-cloud tables for a saved model.
    Analyze {
        #[command(flatten)]
        overrides: Overrides,
        /// Model file; defaults to model.json in the output directory.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| output_err(path, e))
}

fn finish(path: &Path, mut w: impl Write) -> Result<(), CliError> {
    w.flush().map_err(|e| output_err(path, e))
}

fn resolve(config_path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match config_path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(overrides);
    Ok(cfg)
}

fn make_out_dir(cfg: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| output_err(&cfg.out_dir, e))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Ingest(o) => cmd_ingest(&resolve(config, &o)?),
        Command::Fit { overrides, chains } => {
            let mut cfg = resolve(config, &overrides)?;
            if let Some(n) = chains {
                cfg.lda.chains = n;
            }
            cmd_fit(&cfg)
        }
        Command::Sweep { overrides, ks } => cmd_sweep(&resolve(config, &overrides)?, &ks),
        Command::Analyze { overrides, model } => {
            let cfg = resolve(config, &overrides)?;
            let model = model.unwrap_or_else(|| cfg.out_dir.join("model.json"));
            cmd_analyze(&cfg, &model)
        }
    }
}

fn load(cfg: &RunConfig) -> Result<Corpus, CliError> {
    Ok(corpus::load_corpus(cfg.corpus_path()?, cfg.corpus_format()?)?)
}

/// Writes `stats.csv` (type × year counts) and `ratios.csv` (id, length_ratio).
pub fn cmd_ingest(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.check_paths(false)?;
    let corpus = load(cfg)?;
    make_out_dir(cfg)?;
    let table = corpus::type_counts_by_year(&corpus);

    let path = cfg.out_dir.join("stats.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    let header: Vec<&str> = std::iter::once("type")
        .chain(table.columns.iter().map(String::as_str))
        .collect();
    w.write_record(&header).map_err(|e| output_err(&path, e))?;
    for (r, name) in table.rows.iter().enumerate() {
        let row: Vec<String> = std::iter::once(name.clone())
            .chain(table.counts[r].iter().map(u64::to_string))
            .collect();
        w.write_record(&row).map_err(|e| output_err(&path, e))?;
    }
    finish(&path, w.into_inner().map_err(|e| output_err(&path, e))?)?;

    let path = cfg.out_dir.join("ratios.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["id", "length_ratio"]).map_err(|e| output_err(&path, e))?;
    for record in &corpus {
        let ratio = match corpus::length_ratio(record) {
            Ok(r) => r.to_string(),
            Err(e) => {
                eprintln!("warning: {e}");
                String::new()
            }
        };
        w.write_record([record.id.as_str(), &ratio])
            .map_err(|e| output_err(&path, e))?;
    }
    finish(&path, w.into_inner().map_err(|e| output_err(&path, e))?)?;

    println!("records\t{}", corpus.len());
    for (r, name) in table.rows.iter().enumerate() {
        println!("{name}\t{}", table.row_total(r));
    }
    Ok(())
}

/// Corpus after filtering, its documents, vocabulary, and count matrix.
pub struct Prepared {
    pub corpus: Corpus,
    pub vocab: Vocabulary,
    pub counts: DocTermMatrix,
}

fn preprocess_config(cfg: &RunConfig) -> Result<PreprocessConfig, CliError> {
    let mut pre = PreprocessConfig::persian().with_min_token_length(cfg.preprocess.min_token_length);
    if let Some(p) = &cfg.preprocess.stopwords_path {
        pre = pre.with_stopword_file(p)?;
    }
    if let Some(p) = &cfg.preprocess.lemma_rules_path {
        pre = pre.with_lemma_rules(LemmaRules::from_file(p)?);
    }
    pre.validate()?;
    Ok(pre)
}

/// Filter, preprocess (dropping empty documents with a warning) and vectorize.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    let mut corpus = load(cfg)?;
    if let Some(t) = cfg.law_type_filter()? {
        corpus = corpus::filter_by_type(&corpus, t);
    }
    let pre = preprocess_config(cfg)?;
    let (docs, empty) = preprocess::preprocess_corpus(&corpus, &pre);
    for id in &empty {
        eprintln!("warning: record {id} has no tokens after preprocessing; dropped");
    }
    let vocab = vectorize::build_vocabulary(&docs, cfg.vectorize.min_df, cfg.vectorize.max_df_ratio)?;
    let counts = vectorize::count_matrix(&docs, &vocab);
    Ok(Prepared {
        corpus,
        vocab,
        counts,
    })
}

fn model_matrix(cfg: &RunConfig, counts: &DocTermMatrix) -> Result<DocTermMatrix, CliError> {
    Ok(vectorize::model_input(
        counts,
        cfg.lda.mode,
        cfg.vectorize.norm,
        cfg.lda.pseudo_scale,
    )?)
}

/// Writes `model.json`, `config.toml`, `loglik.csv` and `vocab.csv`.
/// Extra chains go to `model_chain<i>.json` and `loglik_chain<i>.csv`.
pub fn cmd_fit(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.check_paths(false)?;
    let prepared = prepare(cfg)?;
    let input = model_matrix(cfg, &prepared.counts)?;
    let lda_cfg = cfg.lda.lda_config(cfg.lda.topics);
    make_out_dir(cfg)?;

    let models = lda::fit_chains(&input, &lda_cfg, cfg.lda.chains)?;
    for (i, model) in models.into_iter().enumerate() {
        let model = model.with_vocabulary(&prepared.vocab)?;
        let suffix = if i == 0 { String::new() } else { format!("_chain{i}") };
        model.save(&cfg.out_dir.join(format!("model{suffix}.json")))?;
        write_trace(&cfg.out_dir.join(format!("loglik{suffix}.csv")), &model)?;
    }

    let path = cfg.out_dir.join("config.toml");
    fs::write(&path, cfg.to_toml()?).map_err(|e| output_err(&path, e))?;
    let path = cfg.out_dir.join("vocab.csv");
    prepared.vocab.write_csv(create(&path)?)?;
    println!(
        "fitted {} topics over {} documents and {} terms",
        lda_cfg.topics,
        input.n_docs(),
        input.n_terms()
    );
    Ok(())
}

fn write_trace(path: &Path, model: &LdaModel) -> Result<(), CliError> {
    let mut w = create(path)?;
    let mut body = String::from("sweep,log_likelihood\n");
    for (i, ll) in model.log_likelihood.iter().enumerate() {
        body.push_str(&format!("{},{ll}\n", i + 1));
    }
    w.write_all(body.as_bytes()).map_err(|e| output_err(path, e))?;
    finish(path, w)
}

/// Writes `sweep.csv`: `k,mean_coherence,perplexity`, ascending in k.
pub fn cmd_sweep(cfg: &RunConfig, ks: &[usize]) -> Result<(), CliError> {
    cfg.check_paths(false)?;
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(CliError::Config("empty topic-count list".into()));
    }
    let prepared = prepare(cfg)?;
    let input = model_matrix(cfg, &prepared.counts)?;
    let top_m = cfg.analyze.top_m.min(prepared.vocab.len());
    make_out_dir(cfg)?;

    let mut body = String::from("k,mean_coherence,perplexity\n");
    for &k in &ks {
        let model = lda::fit(&input, &cfg.lda.lda_config(k))?.with_vocabulary(&prepared.vocab)?;
        let coherence = lda::coherence_umass(&model, &prepared.counts, top_m)?;
        let mean = coherence.iter().sum::<f64>() / coherence.len() as f64;
        let perplexity = lda::perplexity(&model, &input)?;
        body.push_str(&format!("{k},{mean},{perplexity}\n"));
        println!("k={k}\tcoherence={mean:.4}\tperplexity={perplexity:.4}");
    }
    let path = cfg.out_dir.join("sweep.csv");
    fs::write(&path, body).map_err(|e| output_err(&path, e))
}

/// Checks the model against a freshly built vocabulary, then writes the report tables.
pub fn cmd_analyze(cfg: &RunConfig, model_path: &Path) -> Result<(), CliError> {
    cfg.check_paths(true)?;
    let model = LdaModel::load(model_path)?;
    let prepared = prepare(cfg)?;
    model.check_vocabulary(&prepared.vocab)?;
    let labels = match &cfg.analyze.label_map_path {
        Some(p) => analyze::read_label_map(p)?,
        None => Default::default(),
    };
    let options = ReportOptions {
        top_m: cfg.analyze.top_m.min(model.n_terms()),
        normalization: cfg.analyze.normalization,
        labels,
    };
    let files = analyze::write_report(&model, &prepared.corpus, &options, &cfg.out_dir)?;
    for f in files {
        println!("{}", cfg.out_dir.join(f).display());
    }
    Ok(())
}
