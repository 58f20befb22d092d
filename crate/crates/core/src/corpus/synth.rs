//! Synthetic corpora with known generating parameters.
//!
//! [`generate_synthetic_corpus`] samples documents from the LDA generative
//! process so recovered topics can be checked against the truth.
//! [`generate_typed_corpus`] lays out records by type and year for the
//! ingestion and trend tables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::{Corpus, CorpusError, LawRecord, LawType, RecordDate};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub docs: usize,
    pub topics: usize,
    pub vocab_size: usize,
    pub doc_length: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Jalali years assigned to documents round-robin.
    pub years: Vec<i32>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            docs: 200,
            topics: 3,
            vocab_size: 30,
            doc_length: 50,
            alpha: 0.5,
            beta: 0.1,
            years: vec![1398, 1399, 1400, 1401],
            seed: 7,
        }
    }
}

/// Generating parameters behind a synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Document-topic proportions, one row per document.
    pub theta: Vec<Vec<f64>>,
    /// Topic-word distributions, one row per topic.
    pub phi: Vec<Vec<f64>>,
    /// Word indices of each document in generation order.
    pub tokens: Vec<Vec<usize>>,
}

/// Rendered form of vocabulary index `i`. Never a stopword, never stemmed.
pub fn synthetic_word(i: usize) -> String {
    format!("w{i:04}")
}

/// Draws from a symmetric Dirichlet through normalized gamma variates.
pub fn sample_dirichlet<R: Rng + ?Sized>(rng: &mut R, concentration: f64, dim: usize) -> Vec<f64> {
    if dim == 1 {
        return vec![1.0];
    }
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut draws: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        draws.iter_mut().for_each(|x| *x /= total);
    } else {
        // Every variate underflowed: the mass sits on a single coordinate.
        let hot = rng.random_range(0..dim);
        draws.iter_mut().enumerate().for_each(|(i, x)| *x = f64::from(u8::from(i == hot)));
    }
    draws
}

/// Samples an index from unnormalized non-negative weights.
pub(crate) fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    // Rounding left u at the top edge; take the last non-zero weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

fn check(config: &SynthConfig) -> Result<(), CorpusError> {
    let bad = |what: &str| Err(CorpusError::InvalidConfig(what.to_string()));
    if config.docs == 0 {
        return bad("docs must be at least 1");
    }
    if config.topics == 0 {
        return bad("topics must be at least 1");
    }
    if config.vocab_size == 0 {
        return bad("vocab_size must be at least 1");
    }
    if config.doc_length == 0 {
        return bad("doc_length must be at least 1");
    }
    if !(config.alpha > 0.0 && config.alpha.is_finite()) {
        return bad("alpha must be positive");
    }
    if !(config.beta > 0.0 && config.beta.is_finite()) {
        return bad("beta must be positive");
    }
    if config.years.is_empty() {
        return bad("years must not be empty");
    }
    Ok(())
}

/// Samples a corpus from the LDA generative process.
///
/// Each record's title is its first word and its content the remaining
/// words, so title + " " + content reproduces the sampled document.
pub fn generate_synthetic_corpus(
    config: &SynthConfig,
) -> Result<(Corpus, GroundTruth), CorpusError> {
    check(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let phi: Vec<Vec<f64>> = (0..config.topics)
        .map(|_| sample_dirichlet(&mut rng, config.beta, config.vocab_size))
        .collect();
    let mut theta = Vec::with_capacity(config.docs);
    let mut tokens = Vec::with_capacity(config.docs);
    let mut records = Vec::with_capacity(config.docs);
    for d in 0..config.docs {
        let mix = sample_dirichlet(&mut rng, config.alpha, config.topics);
        let words: Vec<usize> = (0..config.doc_length)
            .map(|_| {
                let k = sample_index(&mut rng, &mix);
                sample_index(&mut rng, &phi[k])
            })
            .collect();
        let rendered: Vec<String> = words.iter().map(|&w| synthetic_word(w)).collect();
        let year = config.years[d % config.years.len()];
        let month = (d % 12) as u8 + 1;
        let raw = format!("{year}/{month:02}/{:02}", d % 28 + 1);
        records.push(LawRecord {
            id: format!("syn-{d:05}"),
            title: rendered[0].clone(),
            content: rendered[1..].join(" "),
            lead: String::new(),
            tags: Vec::new(),
            classes: Vec::new(),
            law_type: LawType::Regulation,
            category: "synthetic".into(),
            date: RecordDate::parse(&raw)?,
        });
        theta.push(mix);
        tokens.push(words);
    }
    let corpus = Corpus::new(records, format!("synthetic lda seed={}", config.seed))?;
    Ok((corpus, GroundTruth { theta, phi, tokens }))
}

/// How many records of one type to place in one Jalali year.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeYearCount {
    pub law_type: LawType,
    pub jalali_year: i32,
    pub count: usize,
}

const FILLER_WORDS: &[&str] = &[
    "budget", "article", "council", "ministers", "customs", "tariff", "housing", "urban",
    "insurance", "court", "judicial", "agriculture", "water", "culture", "network", "election",
    "government", "approval", "executive", "amendment",
];

/// Records laid out by type and year, with random filler text.
///
/// Ids run `typed-00000..` in plan order; dates fall on random days of the
/// given Jalali year.
pub fn generate_typed_corpus(plan: &[TypeYearCount], seed: u64) -> Result<Corpus, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(plan.iter().map(|p| p.count).sum());
    for entry in plan {
        for _ in 0..entry.count {
            let n = records.len();
            let mut words = |len: usize| -> String {
                (0..len)
                    .map(|_| FILLER_WORDS[rng.random_range(0..FILLER_WORDS.len())])
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let title = words(3 + n % 5);
            let content = words(10 + n % 40);
            let month: u8 = rng.random_range(1..=12);
            let day: u8 = rng.random_range(1..=29);
            let raw = format!("{}/{month:02}/{day:02}", entry.jalali_year);
            records.push(LawRecord {
                id: format!("typed-{n:05}"),
                title,
                content,
                lead: String::new(),
                tags: Vec::new(),
                classes: Vec::new(),
                law_type: entry.law_type,
                category: "synthetic".into(),
                date: RecordDate::parse(&raw)?,
            });
        }
    }
    Corpus::new(records, format!("synthetic typed seed={seed}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replay_is_deterministic() {
        let cfg = SynthConfig {
            docs: 20,
            ..SynthConfig::default()
        };
        let (a, ta) = generate_synthetic_corpus(&cfg).unwrap();
        let (b, tb) = generate_synthetic_corpus(&cfg).unwrap();
        let mut ja = Vec::new();
        let mut jb = Vec::new();
        a.write_jsonl(&mut ja).unwrap();
        b.write_jsonl(&mut jb).unwrap();
        assert_eq!(ja, jb);
        assert_eq!(ta, tb);
    }

    #[test]
    fn single_topic_mixtures_are_degenerate() {
        let cfg = SynthConfig {
            docs: 10,
            topics: 1,
            ..SynthConfig::default()
        };
        let (_, truth) = generate_synthetic_corpus(&cfg).unwrap();
        assert!(truth.theta.iter().all(|row| row == &vec![1.0]));
    }

    #[test]
    fn rows_are_probability_vectors() {
        let (_, truth) = generate_synthetic_corpus(&SynthConfig::default()).unwrap();
        for row in truth.theta.iter().chain(&truth.phi) {
            assert!(row.iter().all(|&p| p >= 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_config() {
        for cfg in [
            SynthConfig { docs: 0, ..SynthConfig::default() },
            SynthConfig { topics: 0, ..SynthConfig::default() },
            SynthConfig { vocab_size: 0, ..SynthConfig::default() },
            SynthConfig { doc_length: 0, ..SynthConfig::default() },
            SynthConfig { alpha: 0.0, ..SynthConfig::default() },
            SynthConfig { beta: -1.0, ..SynthConfig::default() },
        ] {
            assert!(matches!(
                generate_synthetic_corpus(&cfg),
                Err(CorpusError::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn text_reproduces_tokens() {
        let cfg = SynthConfig {
            docs: 5,
            ..SynthConfig::default()
        };
        let (corpus, truth) = generate_synthetic_corpus(&cfg).unwrap();
        for (r, toks) in corpus.iter().zip(&truth.tokens) {
            let text = format!("{} {}", r.title, r.content);
            let words: Vec<String> = toks.iter().map(|&w| synthetic_word(w)).collect();
            assert_eq!(text.split(' ').collect::<Vec<_>>(), words);
        }
    }

    #[test]
    fn typed_layout() {
        let plan = [
            TypeYearCount { law_type: LawType::Regulation, jalali_year: 1400, count: 3 },
            TypeYearCount { law_type: LawType::Bill, jalali_year: 1401, count: 2 },
        ];
        let c = generate_typed_corpus(&plan, 1).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(super::super::filter_by_type(&c, LawType::Bill).len(), 2);
        assert!(c.iter().all(|r| r.date.jalali_year == 1400 || r.date.jalali_year == 1401));
    }
}
