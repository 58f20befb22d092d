//! Vocabulary, sparse document-term counts and TF-IDF weights.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::preprocess::Document;

#[derive(Debug, Error)]
pub enum VectorizeError {
    #[error("no documents to vectorize")]
    NoDocuments,
    #[error("no term survives document-frequency filtering")]
    EmptyVocabulary,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("every pseudo-count rounds to zero at scale {0}")]
    AllZero(f64),
    #[error("malformed matrix: {0}")]
    Malformed(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Retained terms ordered by descending document frequency, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    df: Vec<usize>,
}

impl Vocabulary {
    /// Builds from parallel term and document-frequency lists, in the given order.
    pub fn from_parts(terms: Vec<String>, df: Vec<usize>) -> Result<Self, VectorizeError> {
        if terms.len() != df.len() {
            return Err(VectorizeError::Malformed(
                "terms and df lengths differ".into(),
            ));
        }
        let index: HashMap<String, usize> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        if index.len() != terms.len() {
            return Err(VectorizeError::Malformed("duplicate term".into()));
        }
        Ok(Self { terms, index, df })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> &str {
        &self.terms[i]
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn df(&self) -> &[usize] {
        &self.df
    }

    /// SHA-256 over `term<TAB>df` lines, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (t, df) in self.terms.iter().zip(&self.df) {
            hasher.update(t.as_bytes());
            hasher.update(b"\t");
            hasher.update(df.to_string().as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    /// Writes `term,df` rows in vocabulary order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), VectorizeError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["term", "df"])?;
        for (t, df) in self.terms.iter().zip(&self.df) {
            w.write_record([t.as_str(), &df.to_string()])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Keeps terms with `min_df <= df <= max_df_ratio * D`.
pub fn build_vocabulary(
    docs: &[Document],
    min_df: usize,
    max_df_ratio: f64,
) -> Result<Vocabulary, VectorizeError> {
    if docs.is_empty() {
        return Err(VectorizeError::NoDocuments);
    }
    if !(max_df_ratio > 0.0 && max_df_ratio <= 1.0) {
        return Err(VectorizeError::InvalidParameter(format!(
            "max_df_ratio {max_df_ratio} outside (0, 1]"
        )));
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        let distinct: HashSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let ceiling = max_df_ratio * docs.len() as f64;
    let mut kept: Vec<(&str, usize)> = df
        .into_iter()
        .filter(|&(_, n)| n >= min_df && n as f64 <= ceiling)
        .collect();
    if kept.is_empty() {
        return Err(VectorizeError::EmptyVocabulary);
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let (terms, df): (Vec<String>, Vec<usize>) =
        kept.into_iter().map(|(t, n)| (t.to_string(), n)).unzip();
    Vocabulary::from_parts(terms, df)
}

/// Sparse document-term counts. Rows hold `(term, count)` sorted by term,
/// with no zero entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocTermMatrix {
    n_terms: usize,
    rows: Vec<Vec<(usize, u32)>>,
    doc_ids: Vec<String>,
}

impl DocTermMatrix {
    pub fn from_rows(
        n_terms: usize,
        rows: Vec<Vec<(usize, u32)>>,
        doc_ids: Vec<String>,
    ) -> Result<Self, VectorizeError> {
        if rows.len() != doc_ids.len() {
            return Err(VectorizeError::Malformed("rows and doc ids differ in length".into()));
        }
        for (d, row) in rows.iter().enumerate() {
            if row.iter().any(|&(t, c)| t >= n_terms || c == 0) {
                return Err(VectorizeError::Malformed(format!(
                    "row {d} has an out-of-range term or a zero count"
                )));
            }
            if row.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(VectorizeError::Malformed(format!("row {d} is not sorted by term")));
            }
        }
        Ok(Self {
            n_terms,
            rows,
            doc_ids,
        })
    }

    /// Dense row-major counts, convenient for tiny fixtures.
    pub fn from_dense(counts: &[Vec<u32>]) -> Result<Self, VectorizeError> {
        let n_terms = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != n_terms) {
            return Err(VectorizeError::Malformed("ragged dense matrix".into()));
        }
        let rows = counts
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(t, &c)| (t, c))
                    .collect()
            })
            .collect();
        let ids = (0..counts.len()).map(|d| format!("d{d}")).collect();
        Self::from_rows(n_terms, rows, ids)
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn row(&self, d: usize) -> &[(usize, u32)] {
        &self.rows[d]
    }

    pub fn rows(&self) -> &[Vec<(usize, u32)>] {
        &self.rows
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn get(&self, d: usize, t: usize) -> u32 {
        self.rows[d]
            .binary_search_by_key(&t, |&(term, _)| term)
            .map_or(0, |i| self.rows[d][i].1)
    }

    pub fn row_total(&self, d: usize) -> u64 {
        self.rows[d].iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn total_tokens(&self) -> u64 {
        (0..self.n_docs()).map(|d| self.row_total(d)).sum()
    }

    /// Number of rows containing each term.
    pub fn doc_frequencies(&self) -> Vec<usize> {
        let mut df = vec![0; self.n_terms];
        for row in &self.rows {
            for &(t, _) in row {
                df[t] += 1;
            }
        }
        df
    }

    /// Keeps the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            n_terms: self.n_terms,
            rows: rows.iter().map(|&d| self.rows[d].clone()).collect(),
            doc_ids: rows.iter().map(|&d| self.doc_ids[d].clone()).collect(),
        }
    }

    /// Writes `doc_id,term,value` triplets in row, then term order.
    pub fn write_triplets<W: Write>(&self, vocab: &Vocabulary, out: W) -> Result<(), VectorizeError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["doc_id", "term", "value"])?;
        for (id, row) in self.doc_ids.iter().zip(&self.rows) {
            for &(t, c) in row {
                w.write_record([id.as_str(), vocab.term(t), &c.to_string()])?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Counts each document's in-vocabulary tokens; other tokens are dropped.
pub fn count_matrix(docs: &[Document], vocab: &Vocabulary) -> DocTermMatrix {
    let rows = docs
        .iter()
        .map(|doc| {
            let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
            for t in doc.tokens.iter().filter_map(|t| vocab.index_of(t)) {
                *counts.entry(t).or_default() += 1;
            }
            counts.into_iter().collect()
        })
        .collect();
    DocTermMatrix {
        n_terms: vocab.len(),
        rows,
        doc_ids: docs.iter().map(|d| d.record_id.clone()).collect(),
    }
}

/// Smoothed inverse document frequency, `ln((1 + D) / (1 + df)) + 1`.
pub fn idf(matrix: &DocTermMatrix) -> Vec<f64> {
    let n = matrix.n_docs() as f64;
    matrix
        .doc_frequencies()
        .into_iter()
        .map(|df| ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    None,
    #[default]
    L2,
}

impl FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Norm::None),
            "l2" => Ok(Norm::L2),
            other => Err(format!("unknown norm {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfidfMatrix {
    n_terms: usize,
    rows: Vec<Vec<(usize, f64)>>,
    doc_ids: Vec<String>,
    pub norm: Norm,
}

impl TfidfMatrix {
    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn row(&self, d: usize) -> &[(usize, f64)] {
        &self.rows[d]
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn get(&self, d: usize, t: usize) -> f64 {
        self.rows[d]
            .binary_search_by_key(&t, |&(term, _)| term)
            .map_or(0.0, |i| self.rows[d][i].1)
    }

    pub fn write_triplets<W: Write>(&self, vocab: &Vocabulary, out: W) -> Result<(), VectorizeError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["doc_id", "term", "value"])?;
        for (id, row) in self.doc_ids.iter().zip(&self.rows) {
            for &(t, v) in row {
                w.write_record([id.as_str(), vocab.term(t), &v.to_string()])?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// `count * idf`, optionally scaled to unit Euclidean length per row.
pub fn tfidf(matrix: &DocTermMatrix, norm: Norm) -> TfidfMatrix {
    let weights = idf(matrix);
    let rows = matrix
        .rows
        .iter()
        .map(|row| {
            let mut out: Vec<(usize, f64)> = row
                .iter()
                .map(|&(t, c)| (t, f64::from(c) * weights[t]))
                .collect();
            if norm == Norm::L2 {
                let len = out.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
                if len > 0.0 {
                    out.iter_mut().for_each(|(_, w)| *w /= len);
                }
            }
            out
        })
        .collect();
    TfidfMatrix {
        n_terms: matrix.n_terms,
        rows,
        doc_ids: matrix.doc_ids.clone(),
        norm,
    }
}

/// Rounds `scale * weight` to integer multiplicities; zeros are dropped.
pub fn to_pseudo_counts(tfidf: &TfidfMatrix, scale: f64) -> Result<DocTermMatrix, VectorizeError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(VectorizeError::InvalidParameter(format!(
            "scale {scale} must be positive"
        )));
    }
    let rows: Vec<Vec<(usize, u32)>> = tfidf
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .filter_map(|&(t, w)| {
                    let c = (scale * w).round();
                    (c >= 1.0).then_some((t, c as u32))
                })
                .collect()
        })
        .collect();
    if rows.iter().all(Vec::is_empty) {
        return Err(VectorizeError::AllZero(scale));
    }
    Ok(DocTermMatrix {
        n_terms: tfidf.n_terms,
        rows,
        doc_ids: tfidf.doc_ids.clone(),
    })
}

/// What the sampler consumes: raw counts, or rounded TF-IDF weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InputMode {
    #[default]
    #[serde(rename = "counts")]
    Counts,
    #[serde(rename = "tfidf-pseudo")]
    TfidfPseudo,
}

impl InputMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InputMode::Counts => "counts",
            InputMode::TfidfPseudo => "tfidf-pseudo",
        }
    }
}

impl fmt::Display for InputMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InputMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "counts" => Ok(InputMode::Counts),
            "tfidf-pseudo" | "tfidf_pseudo" => Ok(InputMode::TfidfPseudo),
            other => Err(format!("unknown input mode {other:?}")),
        }
    }
}

/// Matrix handed to the sampler under `mode`. Rows left empty by rounding
/// stay in place so documents keep their positions.
pub fn model_input(
    counts: &DocTermMatrix,
    mode: InputMode,
    norm: Norm,
    scale: f64,
) -> Result<DocTermMatrix, VectorizeError> {
    match mode {
        InputMode::Counts => Ok(counts.clone()),
        InputMode::TfidfPseudo => to_pseudo_counts(&tfidf(counts, norm), scale),
    }
}
