//! Run configuration: a TOML file, optionally named by `LEXTOPIC_CONFIG`,
//! with command-line flags applied on top.

use std::path::{Path, PathBuf};

use lextopic_core::corpus::{CorpusFormat, LawType};
use lextopic_core::lda::LdaConfig;
use lextopic_core::trend::Normalization;
use lextopic_core::vectorize::{InputMode, Norm};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus_path: Option<PathBuf>,
    /// `jsonl` or `csv`; guessed from the extension when absent.
    pub format: Option<String>,
    /// A law type name, or `all` to keep every record.
    pub filter_type: String,
    pub out_dir: PathBuf,
    pub preprocess: PreprocessSection,
    pub vectorize: VectorizeSection,
    pub lda: LdaSection,
    pub analyze: AnalyzeSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus_path: None,
            format: None,
            filter_type: LawType::Regulation.as_str().to_owned(),
            out_dir: PathBuf::from("out"),
            preprocess: PreprocessSection::default(),
            vectorize: VectorizeSection::default(),
            lda: LdaSection::default(),
            analyze: AnalyzeSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    /// Replaces the bundled Persian stopword list.
    pub stopwords_path: Option<PathBuf>,
    /// Replaces the bundled Persian lemma rules.
    pub lemma_rules_path: Option<PathBuf>,
    pub min_token_length: usize,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        Self {
            stopwords_path: None,
            lemma_rules_path: None,
            min_token_length: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VectorizeSection {
    pub min_df: usize,
    pub max_df_ratio: f64,
    pub norm: Norm,
}

impl Default for VectorizeSection {
    fn default() -> Self {
        Self {
            min_df: 1,
            max_df_ratio: 1.0,
            norm: Norm::L2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaSection {
    pub topics: usize,
    /// Defaults to 50 / topics.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub mode: InputMode,
    pub pseudo_scale: f64,
    pub chains: usize,
}

impl Default for LdaSection {
    fn default() -> Self {
        let d = LdaConfig::default();
        Self {
            topics: d.topics,
            alpha: None,
            beta: d.beta,
            sweeps: d.sweeps,
            burn_in: d.burn_in,
            seed: d.seed,
            mode: d.input_mode,
            pseudo_scale: d.pseudo_scale,
            chains: 1,
        }
    }
}

impl LdaSection {
    pub fn lda_config(&self, topics: usize) -> LdaConfig {
        let base = LdaConfig::with_topics(topics);
        LdaConfig {
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta,
            sweeps: self.sweeps,
            burn_in: self.burn_in,
            seed: self.seed,
            input_mode: self.mode,
            pseudo_scale: self.pseudo_scale,
            ..base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    pub top_m: usize,
    pub normalization: Normalization,
    pub label_map_path: Option<PathBuf>,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        Self {
            top_m: 10,
            normalization: Normalization::PerTopic,
            label_map_path: None,
        }
    }
}

/// Flags that override the config file when given.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Corpus file (JSONL or CSV).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Corpus format: jsonl or csv.
    #[arg(long)]
    pub format: Option<String>,
    /// Law type to keep, or `all`.
    #[arg(long)]
    pub filter_type: Option<String>,
    #[arg(long)]
    pub topics: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampler input: counts or tfidf-pseudo.
    #[arg(long)]
    pub mode: Option<InputMode>,
    #[arg(long)]
    pub min_df: Option<usize>,
    #[arg(long)]
    pub max_df_ratio: Option<f64>,
    #[arg(long)]
    pub top_m: Option<usize>,
    /// Topic label map (`id<TAB>label` per line).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        fn set<T: Clone>(slot: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *slot = v.clone();
            }
        }
        if o.corpus.is_some() {
            self.corpus_path.clone_from(&o.corpus);
        }
        if o.format.is_some() {
            self.format.clone_from(&o.format);
        }
        set(&mut self.filter_type, &o.filter_type);
        set(&mut self.lda.topics, &o.topics);
        if o.alpha.is_some() {
            self.lda.alpha = o.alpha;
        }
        set(&mut self.lda.beta, &o.beta);
        set(&mut self.lda.sweeps, &o.sweeps);
        set(&mut self.lda.burn_in, &o.burn_in);
        set(&mut self.lda.seed, &o.seed);
        set(&mut self.lda.mode, &o.mode);
        set(&mut self.vectorize.min_df, &o.min_df);
        set(&mut self.vectorize.max_df_ratio, &o.max_df_ratio);
        set(&mut self.analyze.top_m, &o.top_m);
        if o.labels.is_some() {
            self.analyze.label_map_path.clone_from(&o.labels);
        }
        set(&mut self.out_dir, &o.out);
    }

    pub fn corpus_format(&self) -> Result<CorpusFormat, CliError> {
        match &self.format {
            Some(f) => f.parse().map_err(CliError::Config),
            None => Ok(CorpusFormat::from_path(self.corpus_path()?)),
        }
    }

    pub fn corpus_path(&self) -> Result<&Path, CliError> {
        self.corpus_path
            .as_deref()
            .ok_or_else(|| CliError::Config("no corpus given (--corpus or corpus_path)".into()))
    }

    /// `None` keeps every record.
    pub fn law_type_filter(&self) -> Result<Option<LawType>, CliError> {
        if self.filter_type.eq_ignore_ascii_case("all") {
            return Ok(None);
        }
        self.filter_type
            .parse()
            .map(Some)
            .map_err(|v| CliError::Config(format!("unknown filter type {v:?}")))
    }

    /// Fails on the first referenced input path that does not exist.
    pub fn check_paths(&self, need_labels: bool) -> Result<(), CliError> {
        let mut paths = vec![self.corpus_path()?];
        paths.extend(self.preprocess.stopwords_path.as_deref());
        paths.extend(self.preprocess.lemma_rules_path.as_deref());
        if need_labels {
            paths.extend(self.analyze.label_map_path.as_deref());
        }
        match paths.into_iter().find(|p| !p.exists()) {
            Some(p) => Err(CliError::Config(format!("{}: no such file", p.display()))),
            None => Ok(()),
        }
    }
}
