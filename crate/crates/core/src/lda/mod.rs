//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! A fit draws initial topic assignments, runs `burn_in` sweeps, then keeps
//! sweeping and averages the smoothed estimators
//! `θ̂_dk = (n_dk + α) / (n_d + Kα)` and `φ̂_kw = (n_kw + β) / (n_k + Vβ)`
//! over every remaining sweep. The collapsed log-likelihood `ln p(w | z)` is
//! recorded after each sweep.
//!
//! One chain is strictly sequential. [`fit_chains`] runs independent chains
//! on separate threads and returns them unmerged, since topic labels do not
//! correspond across chains.

mod eval;
mod exact;
mod sampler;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vectorize::{DocTermMatrix, InputMode, Vocabulary};

pub use eval::{coherence_umass, mean_log_likelihood, perplexity};
pub use exact::{exact_posterior, ExactPosterior, MAX_ASSIGNMENTS};
pub use sampler::{
    gibbs_conditional, gibbs_sweep, init_assignments, log_joint, log_likelihood, log_prior,
    CountTables, SamplerState,
};

pub const MODEL_FORMAT: &str = "lextopic-lda";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LdaError {
    #[error("invalid LDA config: {0}")]
    InvalidConfig(String),
    #[error("matrix has no tokens")]
    EmptyMatrix,
    #[error("enumeration of {topics}^{tokens} assignments exceeds the limit")]
    TooLarge { tokens: u64, topics: usize },
    #[error("vocabulary mismatch: model has {expected} terms, data has {found}")]
    VocabularyMismatch { expected: usize, found: usize },
    #[error("vocabulary hash mismatch: model {expected}, data {found}")]
    VocabularyHashMismatch { expected: String, found: String },
    #[error("document mismatch: model has {expected} documents, data has {found}")]
    DocumentMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub topics: usize,
    /// Symmetric document-topic prior.
    pub alpha: f64,
    /// Symmetric topic-word prior.
    pub beta: f64,
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub input_mode: InputMode,
    /// Multiplier applied to TF-IDF weights before rounding in `tfidf-pseudo` mode.
    pub pseudo_scale: f64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self::with_topics(10)
    }
}

impl LdaConfig {
    /// Defaults for `topics` topics: α = 50/K, β = 0.01, 1000 sweeps with 500 burn-in.
    pub fn with_topics(topics: usize) -> Self {
        Self {
            topics,
            alpha: 50.0 / topics.max(1) as f64,
            beta: 0.01,
            sweeps: 1000,
            burn_in: 500,
            seed: 42,
            input_mode: InputMode::Counts,
            pseudo_scale: 10.0,
        }
    }

    pub fn validate(&self) -> Result<(), LdaError> {
        let bad = |m: String| Err(LdaError::InvalidConfig(m));
        if self.topics == 0 {
            return bad("topics must be at least 1".into());
        }
        if u32::try_from(self.topics).is_err() {
            return bad(format!("too many topics: {}", self.topics));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if self.sweeps == 0 {
            return bad("sweeps must be at least 1".into());
        }
        if self.burn_in >= self.sweeps {
            return bad(format!(
                "burn_in {} must be less than sweeps {}",
                self.burn_in, self.sweeps
            ));
        }
        if !(self.pseudo_scale > 0.0 && self.pseudo_scale.is_finite()) {
            return bad(format!("pseudo_scale must be positive, got {}", self.pseudo_scale));
        }
        Ok(())
    }
}

/// A fitted model: posterior-mean θ̂ (D × K) and φ̂ (K × V), both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    pub config: LdaConfig,
    pub terms: Vec<String>,
    pub vocab_hash: String,
    pub doc_ids: Vec<String>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// `ln p(w | z)` after each sweep.
    pub log_likelihood: Vec<f64>,
}

impl LdaModel {
    /// Assembles a model from explicit parts, checking shapes.
    pub fn from_parts(
        config: LdaConfig,
        terms: Vec<String>,
        doc_ids: Vec<String>,
        theta: Vec<f64>,
        phi: Vec<f64>,
    ) -> Result<Self, LdaError> {
        let k = config.topics;
        if theta.len() != doc_ids.len() * k || phi.len() != k * terms.len() {
            return Err(LdaError::InvalidArgument(format!(
                "theta/phi shapes do not match {} docs, {k} topics, {} terms",
                doc_ids.len(),
                terms.len()
            )));
        }
        Ok(Self {
            config,
            vocab_hash: String::new(),
            terms,
            doc_ids,
            theta,
            phi,
            log_likelihood: Vec::new(),
        })
    }

    pub fn topics(&self) -> usize {
        self.config.topics
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, w: usize) -> &str {
        &self.terms[w]
    }

    pub fn theta_row(&self, d: usize) -> &[f64] {
        let k = self.topics();
        &self.theta[d * k..(d + 1) * k]
    }

    pub fn phi_row(&self, k: usize) -> &[f64] {
        let v = self.n_terms();
        &self.phi[k * v..(k + 1) * v]
    }

    /// Term indices of topic `k` by descending φ̂, ties by term text.
    pub fn top_word_indices(&self, k: usize, n: usize) -> Vec<usize> {
        let row = self.phi_row(k);
        let mut idx: Vec<usize> = (0..row.len()).collect();
        idx.sort_by(|&a, &b| {
            row[b]
                .total_cmp(&row[a])
                .then_with(|| self.terms[a].cmp(&self.terms[b]))
        });
        idx.truncate(n);
        idx
    }

    /// Attaches the vocabulary the matrix was built from.
    pub fn with_vocabulary(mut self, vocab: &Vocabulary) -> Result<Self, LdaError> {
        if vocab.len() != self.n_terms() {
            return Err(LdaError::VocabularyMismatch {
                expected: self.n_terms(),
                found: vocab.len(),
            });
        }
        self.terms = vocab.terms().to_vec();
        self.vocab_hash = vocab.content_hash();
        Ok(self)
    }

    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<(), LdaError> {
        let found = vocab.content_hash();
        if found != self.vocab_hash {
            return Err(LdaError::VocabularyHashMismatch {
                expected: self.vocab_hash.clone(),
                found,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelFile::from(self)).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LdaError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| LdaError::ModelFormat(e.to_string()))?;
        file.into_model()
    }

    pub fn save(&self, path: &Path) -> Result<(), LdaError> {
        let io_err = |source| LdaError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
        serde_json::to_writer(&mut out, &ModelFile::from(self))
            .map_err(|e| LdaError::ModelFormat(e.to_string()))?;
        out.write_all(b"\n").map_err(io_err)?;
        out.flush().map_err(io_err)
    }

    pub fn load(path: &Path) -> Result<Self, LdaError> {
        let file = File::open(path).map_err(|source| LdaError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: ModelFile = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| LdaError::ModelFormat(e.to_string()))?;
        file.into_model()
    }
}

/// On-disk layout of a model.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: LdaConfig,
    vocab_hash: String,
    n_docs: usize,
    n_topics: usize,
    n_terms: usize,
    terms: Vec<String>,
    doc_ids: Vec<String>,
    theta: Vec<f64>,
    phi: Vec<f64>,
    log_likelihood: Vec<f64>,
}

impl From<&LdaModel> for ModelFile {
    fn from(m: &LdaModel) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            config: m.config,
            vocab_hash: m.vocab_hash.clone(),
            n_docs: m.n_docs(),
            n_topics: m.topics(),
            n_terms: m.n_terms(),
            terms: m.terms.clone(),
            doc_ids: m.doc_ids.clone(),
            theta: m.theta.clone(),
            phi: m.phi.clone(),
            log_likelihood: m.log_likelihood.clone(),
        }
    }
}

impl ModelFile {
    fn into_model(self) -> Result<LdaModel, LdaError> {
        if self.format != MODEL_FORMAT {
            return Err(LdaError::ModelFormat(format!("unknown format {:?}", self.format)));
        }
        if self.version != MODEL_VERSION {
            return Err(LdaError::ModelFormat(format!(
                "unsupported version {}",
                self.version
            )));
        }
        if self.n_topics != self.config.topics
            || self.n_docs != self.doc_ids.len()
            || self.n_terms != self.terms.len()
        {
            return Err(LdaError::ModelFormat("declared dimensions disagree".into()));
        }
        let mut model =
            LdaModel::from_parts(self.config, self.terms, self.doc_ids, self.theta, self.phi)
                .map_err(|e| LdaError::ModelFormat(e.to_string()))?;
        model.vocab_hash = self.vocab_hash;
        model.log_likelihood = self.log_likelihood;
        Ok(model)
    }
}

/// Runs one chain. Terms are placeholders `t0, t1, ...` until a vocabulary
/// is attached with [`LdaModel::with_vocabulary`] (or use [`fit_with_vocabulary`]).
pub fn fit(matrix: &DocTermMatrix, config: &LdaConfig) -> Result<LdaModel, LdaError> {
    config.validate()?;
    if matrix.n_docs() == 0 || matrix.total_tokens() == 0 {
        return Err(LdaError::EmptyMatrix);
    }
    let mut state = init_assignments(matrix, config)?;
    let (d, k, v) = (matrix.n_docs(), config.topics, matrix.n_terms());
    let mut theta = vec![0.0; d * k];
    let mut phi = vec![0.0; k * v];
    let mut trace = Vec::with_capacity(config.sweeps);
    for sweep in 0..config.sweeps {
        gibbs_sweep(&mut state, config);
        trace.push(log_likelihood(&state, config));
        if sweep >= config.burn_in {
            state.accumulate(config, &mut theta, &mut phi);
        }
    }
    let samples = (config.sweeps - config.burn_in) as f64;
    theta.iter_mut().for_each(|x| *x /= samples);
    phi.iter_mut().for_each(|x| *x /= samples);

    let terms = (0..v).map(|i| format!("t{i}")).collect();
    let mut model = LdaModel::from_parts(*config, terms, matrix.doc_ids().to_vec(), theta, phi)?;
    model.log_likelihood = trace;
    Ok(model)
}

pub fn fit_with_vocabulary(
    matrix: &DocTermMatrix,
    vocab: &Vocabulary,
    config: &LdaConfig,
) -> Result<LdaModel, LdaError> {
    fit(matrix, config)?.with_vocabulary(vocab)
}

/// Independent chains seeded `seed, seed + 1, ...`, run concurrently.
pub fn fit_chains(
    matrix: &DocTermMatrix,
    config: &LdaConfig,
    chains: usize,
) -> Result<Vec<LdaModel>, LdaError> {
    if chains == 0 {
        return Err(LdaError::InvalidConfig("chains must be at least 1".into()));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains)
            .map(|i| {
                let cfg = LdaConfig {
                    seed: config.seed.wrapping_add(i as u64),
                    ..*config
                };
                scope.spawn(move || fit(matrix, &cfg))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(k: usize) -> LdaConfig {
        LdaConfig {
            topics: k,
            alpha: 0.5,
            beta: 0.1,
            sweeps: 60,
            burn_in: 20,
            seed: 3,
            ..LdaConfig::default()
        }
    }

    fn matrix() -> DocTermMatrix {
        DocTermMatrix::from_dense(&[
            vec![3, 2, 0, 0, 1],
            vec![0, 0, 4, 2, 0],
            vec![2, 3, 0, 1, 0],
            vec![0, 1, 3, 3, 1],
        ])
        .unwrap()
    }

    #[test]
    fn defaults() {
        let c = LdaConfig::default();
        assert_eq!(c.topics, 10);
        assert_eq!(c.alpha, 5.0);
        assert_eq!(c.beta, 0.01);
        assert_eq!((c.sweeps, c.burn_in), (1000, 500));
        c.validate().unwrap();
    }

    #[test]
    fn invalid_configs() {
        for c in [
            LdaConfig { topics: 0, ..small_config(2) },
            LdaConfig { alpha: 0.0, ..small_config(2) },
            LdaConfig { beta: f64::NAN, ..small_config(2) },
            LdaConfig { sweeps: 5, burn_in: 5, ..small_config(2) },
        ] {
            assert!(matches!(fit(&matrix(), &c), Err(LdaError::InvalidConfig(_))));
        }
    }

    #[test]
    fn empty_matrix() {
        let m = DocTermMatrix::from_dense(&[vec![0, 0]]).unwrap();
        assert!(matches!(fit(&m, &small_config(2)), Err(LdaError::EmptyMatrix)));
    }

    #[test]
    fn rows_are_distributions() {
        let model = fit(&matrix(), &small_config(3)).unwrap();
        for d in 0..model.n_docs() {
            assert!((model.theta_row(d).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        for k in 0..model.topics() {
            assert!((model.phi_row(k).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(model.log_likelihood.len(), 60);
    }

    #[test]
    fn single_topic_fit() {
        let m = matrix();
        let c = small_config(1);
        let model = fit(&m, &c).unwrap();
        assert!(model.theta.iter().all(|&t| (t - 1.0).abs() < 1e-12));
        let n = m.total_tokens() as f64;
        let v = m.n_terms() as f64;
        for w in 0..m.n_terms() {
            let count: u32 = (0..m.n_docs()).map(|d| m.get(d, w)).sum();
            let expected = (f64::from(count) + c.beta) / (n + v * c.beta);
            assert!((model.phi_row(0)[w] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_replays_bit_for_bit() {
        let a = fit(&matrix(), &small_config(2)).unwrap();
        let b = fit(&matrix(), &small_config(2)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let a = fit(&matrix(), &small_config(3)).unwrap();
        let b = LdaModel::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn model_file_rejects_other_versions() {
        let a = fit(&matrix(), &small_config(2)).unwrap();
        let text = a.to_json().replace("\"version\":1", "\"version\":99");
        assert!(matches!(LdaModel::from_json(&text), Err(LdaError::ModelFormat(_))));
    }

    #[test]
    fn chains_are_independent() {
        let models = fit_chains(&matrix(), &small_config(2), 3).unwrap();
        assert_eq!(models.len(), 3);
        let solo = fit(&matrix(), &LdaConfig { seed: 4, ..small_config(2) }).unwrap();
        assert_eq!(models[1], solo);
    }

    #[test]
    fn top_words_break_ties_by_term() {
        let cfg = LdaConfig { topics: 1, ..small_config(1) };
        let model = LdaModel::from_parts(
            cfg,
            vec!["b".into(), "a".into(), "c".into()],
            vec!["d".into()],
            vec![1.0],
            vec![0.25, 0.25, 0.5],
        )
        .unwrap();
        assert_eq!(model.top_word_indices(0, 3), [2, 1, 0]);
    }

    #[test]
    fn perplexity_of_uniform_model() {
        let v = 7;
        let cfg = LdaConfig { topics: 1, ..small_config(1) };
        let m = DocTermMatrix::from_dense(&[vec![1, 2, 0, 3, 1, 0, 4], vec![0, 1, 1, 1, 1, 1, 1]]).unwrap();
        let model = LdaModel::from_parts(
            cfg,
            (0..v).map(|i| format!("t{i}")).collect(),
            vec!["a".into(), "b".into()],
            vec![1.0, 1.0],
            vec![1.0 / v as f64; v],
        )
        .unwrap();
        let p = perplexity(&model, &m).unwrap();
        assert!((p - v as f64).abs() < 1e-9 * v as f64);
    }

    #[test]
    fn perplexity_checks_shapes() {
        let model = fit(&matrix(), &small_config(2)).unwrap();
        let other = DocTermMatrix::from_dense(&[vec![1, 1]]).unwrap();
        assert!(matches!(
            perplexity(&model, &other),
            Err(LdaError::VocabularyMismatch { .. })
        ));
    }

    #[test]
    fn coherence_hand_fixture() {
        // Terms a, b, c over four documents:
        // d0 {a, b}, d1 {a, b, c}, d2 {a}, d3 {c}.
        let m = DocTermMatrix::from_dense(&[
            vec![1, 1, 0],
            vec![2, 1, 1],
            vec![1, 0, 0],
            vec![0, 0, 3],
        ])
        .unwrap();
        let cfg = LdaConfig { topics: 1, ..small_config(1) };
        let model = LdaModel::from_parts(
            cfg,
            vec!["a".into(), "b".into(), "c".into()],
            (0..4).map(|d| format!("d{d}")).collect(),
            vec![1.0; 4],
            vec![0.5, 0.3, 0.2],
        )
        .unwrap();
        // Ranked a, b, c. D(a)=3, D(b)=2, D(c)=2, D(a,b)=2, D(a,c)=1, D(b,c)=1.
        let expected = (3.0f64 / 2.0).ln() + (2.0f64 / 2.0).ln() + (2.0f64 / 2.0).ln();
        let got = coherence_umass(&model, &m, 3).unwrap();
        assert!((got[0] - expected).abs() < 1e-9);
        // Two top words only.
        let got = coherence_umass(&model, &m, 2).unwrap();
        assert!((got[0] - (3.0f64 / 2.0).ln()).abs() < 1e-9);
        assert!(coherence_umass(&model, &m, 1).is_err());
    }
}
