//! Figures computed from a fitted model: dominant topics, topic shares,
//! per-year topic percentages, top words and word-cloud weights.
//!
//! Documents are attributed to the argmax of their θ̂ row. Model documents are
//! matched to corpus records by id; corpus records the model never saw (for
//! example documents left empty by preprocessing) are ignored.

use std::collections::{BTreeSet, HashMap};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, LawRecord};
use crate::lda::LdaModel;
use crate::trend::{Normalization, TrendTable};

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("model document {0:?} has no matching corpus record")]
    AlignmentMismatch(String),
    #[error("label map names topic {0}, which the model does not have")]
    UnknownTopicId(usize),
    #[error("label map line {line}: {message}")]
    LabelSyntax { line: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Argmax of a θ row, lowest index on ties.
pub fn dominant_topic(theta_row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &t) in theta_row.iter().enumerate().skip(1) {
        if t > theta_row[best] {
            best = k;
        }
    }
    best
}

/// Dominant topic of every model document, in model order.
pub fn dominant_topics(model: &LdaModel) -> Vec<usize> {
    (0..model.n_docs())
        .map(|d| dominant_topic(model.theta_row(d)))
        .collect()
}

fn aligned_records<'a>(model: &LdaModel, corpus: &'a Corpus) -> Result<Vec<&'a LawRecord>, AnalyzeError> {
    model
        .doc_ids
        .iter()
        .map(|id| {
            corpus
                .get(id)
                .ok_or_else(|| AnalyzeError::AlignmentMismatch(id.clone()))
        })
        .collect()
}

fn topic_rows(k: usize) -> Vec<String> {
    (0..k).map(|t| t.to_string()).collect()
}

/// Dominant-topic counts as one column of percentages of all documents.
pub fn topic_shares(model: &LdaModel, corpus: &Corpus) -> Result<TrendTable, AnalyzeError> {
    aligned_records(model, corpus)?;
    let mut counts = vec![vec![0u64]; model.topics()];
    for k in dominant_topics(model) {
        counts[k][0] += 1;
    }
    Ok(TrendTable::new(
        topic_rows(model.topics()),
        vec!["all".into()],
        counts,
        Normalization::PerYear,
    ))
}

/// Dominant-topic counts by Gregorian year, topics as rows.
pub fn yearly_topic_percentages(
    model: &LdaModel,
    corpus: &Corpus,
    normalization: Normalization,
) -> Result<TrendTable, AnalyzeError> {
    let records = aligned_records(model, corpus)?;
    let years: Vec<i32> = records
        .iter()
        .map(|r| r.gregorian_year())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut counts = vec![vec![0u64; years.len()]; model.topics()];
    for (record, k) in records.iter().zip(dominant_topics(model)) {
        let y = years
            .binary_search(&record.gregorian_year())
            .expect("year collected above");
        counts[k][y] += 1;
    }
    Ok(TrendTable::new(
        topic_rows(model.topics()),
        years.iter().map(i32::to_string).collect(),
        counts,
        normalization,
    ))
}

/// The `n` most probable terms of a topic, ties in term order.
pub fn top_words(model: &LdaModel, topic: usize, n: usize) -> Vec<(String, f64)> {
    let row = model.phi_row(topic);
    model
        .top_word_indices(topic, n)
        .into_iter()
        .map(|w| (model.term(w).to_owned(), row[w]))
        .collect()
}

/// Top words scaled so the first weight is 1.
pub fn wordcloud_weights(model: &LdaModel, topic: usize, n: usize) -> Vec<(String, f64)> {
    let words = top_words(model, topic, n);
    let Some(&(_, max)) = words.first() else {
        return words;
    };
    words.into_iter().map(|(t, p)| (t, p / max)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: usize,
    pub label: String,
    pub top_words: Vec<(String, f64)>,
}

/// Parses `id<TAB>label` or `id=label` lines; `#` starts a comment.
pub fn parse_label_map(text: &str) -> Result<HashMap<usize, String>, AnalyzeError> {
    let mut out = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |message: &str| AnalyzeError::LabelSyntax {
            line: i + 1,
            message: message.into(),
        };
        let (id, label) = line
            .split_once('\t')
            .or_else(|| line.split_once('='))
            .ok_or_else(|| syntax("expected `id<TAB>label` or `id=label`"))?;
        let id: usize = id.trim().parse().map_err(|_| syntax("topic id is not a number"))?;
        let label = label.trim();
        if label.is_empty() {
            return Err(syntax("empty label"));
        }
        if out.insert(id, label.to_owned()).is_some() {
            return Err(syntax("topic listed twice"));
        }
    }
    Ok(out)
}

pub fn read_label_map(path: &Path) -> Result<HashMap<usize, String>, AnalyzeError> {
    let text = fs::read_to_string(path).map_err(|source| AnalyzeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_label_map(&text)
}

/// One summary per topic; unlabelled topics are called `topic-k`.
pub fn label_topics(
    model: &LdaModel,
    labels: &HashMap<usize, String>,
    top_m: usize,
) -> Result<Vec<TopicSummary>, AnalyzeError> {
    if let Some(&bad) = labels.keys().filter(|&&k| k >= model.topics()).min() {
        return Err(AnalyzeError::UnknownTopicId(bad));
    }
    Ok((0..model.topics())
        .map(|k| TopicSummary {
            topic_id: k,
            label: labels.get(&k).cloned().unwrap_or_else(|| format!("topic-{k}")),
            top_words: top_words(model, k, top_m),
        })
        .collect())
}

pub fn write_topics_json<W: Write>(summaries: &[TopicSummary], mut out: W) -> Result<(), AnalyzeError> {
    serde_json::to_writer_pretty(&mut out, summaries)?;
    out.write_all(b"\n").map_err(serde_json::Error::io)?;
    Ok(())
}

/// `topic,count,percent`
pub fn write_shares_csv<W: Write>(shares: &TrendTable, out: W) -> Result<(), AnalyzeError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["topic", "count", "percent"])?;
    for (r, topic) in shares.rows.iter().enumerate() {
        w.write_record([
            topic.clone(),
            shares.counts[r][0].to_string(),
            shares.percentages[r][0].to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `topic,year,count,percent,normalization`, one line per cell.
pub fn write_trends_csv<W: Write>(trends: &TrendTable, out: W) -> Result<(), AnalyzeError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["topic", "year", "count", "percent", "normalization"])?;
    for (r, topic) in trends.rows.iter().enumerate() {
        for (c, year) in trends.columns.iter().enumerate() {
            w.write_record([
                topic.as_str(),
                year.as_str(),
                &trends.counts[r][c].to_string(),
                &trends.percentages[r][c].to_string(),
                trends.normalization.as_str(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `term,weight`
pub fn write_wordcloud_csv<W: Write>(weights: &[(String, f64)], out: W) -> Result<(), AnalyzeError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["term", "weight"])?;
    for (term, weight) in weights {
        w.write_record([term.as_str(), &weight.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub top_m: usize,
    pub normalization: Normalization,
    pub labels: HashMap<usize, String>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            top_m: 10,
            normalization: Normalization::PerTopic,
            labels: HashMap::new(),
        }
    }
}

/// Writes topics.json, shares.csv, trends.csv and wordcloud_<k>.csv into `dir`.
/// Returns the file names written, in order.
pub fn write_report(
    model: &LdaModel,
    corpus: &Corpus,
    options: &ReportOptions,
    dir: &Path,
) -> Result<Vec<String>, AnalyzeError> {
    if options.top_m == 0 || options.top_m > model.n_terms() {
        return Err(AnalyzeError::InvalidArgument(format!(
            "top_m {} outside 1..={}",
            options.top_m,
            model.n_terms()
        )));
    }
    let summaries = label_topics(model, &options.labels, options.top_m)?;
    let shares = topic_shares(model, corpus)?;
    let trends = yearly_topic_percentages(model, corpus, options.normalization)?;

    fs::create_dir_all(dir).map_err(|source| AnalyzeError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let create = |name: &str| -> Result<BufWriter<File>, AnalyzeError> {
        let path = dir.join(name);
        File::create(&path)
            .map(BufWriter::new)
            .map_err(|source| AnalyzeError::Io { path, source })
    };
    let mut written = Vec::new();
    write_topics_json(&summaries, create("topics.json")?)?;
    written.push("topics.json".to_owned());
    write_shares_csv(&shares, create("shares.csv")?)?;
    written.push("shares.csv".to_owned());
    write_trends_csv(&trends, create("trends.csv")?)?;
    written.push("trends.csv".to_owned());
    for k in 0..model.topics() {
        let name = format!("wordcloud_{k}.csv");
        write_wordcloud_csv(&wordcloud_weights(model, k, options.top_m), create(&name)?)?;
        written.push(name);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LawType, RecordDate};
    use crate::lda::LdaConfig;

    fn record(id: &str, date: &str) -> LawRecord {
        LawRecord {
            id: id.into(),
            title: format!("title {id}"),
            content: "body".into(),
            lead: String::new(),
            tags: vec![],
            classes: vec![],
            law_type: LawType::Regulation,
            category: "c".into(),
            date: RecordDate::parse(date).unwrap(),
        }
    }

    fn model(theta: Vec<Vec<f64>>, phi: Vec<Vec<f64>>, terms: &[&str]) -> LdaModel {
        let k = phi.len();
        let ids = (0..theta.len()).map(|d| format!("r{d}")).collect();
        LdaModel::from_parts(
            LdaConfig::with_topics(k),
            terms.iter().map(|t| t.to_string()).collect(),
            ids,
            theta.concat(),
            phi.concat(),
        )
        .unwrap()
    }

    fn corpus(dates: &[&str]) -> Corpus {
        let records = dates
            .iter()
            .enumerate()
            .map(|(d, date)| record(&format!("r{d}"), date))
            .collect();
        Corpus::new(records, "test").unwrap()
    }

    #[test]
    fn dominant_topic_cases() {
        assert_eq!(dominant_topic(&[0.1, 0.7, 0.2]), 1);
        assert_eq!(dominant_topic(&[0.5, 0.5]), 0);
        assert_eq!(dominant_topic(&[0.2, 0.4, 0.4]), 1);
    }

    #[test]
    fn shares_all_topic_zero() {
        let m = model(
            vec![vec![0.9, 0.1], vec![0.6, 0.4], vec![0.5, 0.5]],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            &["a", "b"],
        );
        let s = topic_shares(&m, &corpus(&["1400/01/01"; 3])).unwrap();
        assert_eq!(s.counts, vec![vec![3], vec![0]]);
        assert_eq!(s.percentages, vec![vec![100.0], vec![0.0]]);
    }

    #[test]
    fn shares_reject_unaligned_model() {
        let m = model(vec![vec![1.0]; 3], vec![vec![1.0]], &["a"]);
        let err = topic_shares(&m, &corpus(&["1400/01/01"; 2])).unwrap_err();
        assert!(matches!(err, AnalyzeError::AlignmentMismatch(id) if id == "r2"));
    }

    #[test]
    fn single_year_rows_are_full() {
        let m = model(
            vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.3, 0.7]],
            vec![vec![1.0], vec![1.0]],
            &["a"],
        );
        let t = yearly_topic_percentages(&m, &corpus(&["1400/05/01"; 3]), Normalization::PerTopic)
            .unwrap();
        assert_eq!(t.columns, ["2021"]);
        assert_eq!(t.percentages, vec![vec![100.0], vec![100.0]]);
        assert_eq!(t.total(), 3);
    }

    #[test]
    fn per_topic_versus_per_year() {
        // Topic 0: two docs in 2021, one in 2022. Topic 1: one doc in 2022.
        let m = model(
            vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0], vec![1.0]],
            &["a"],
        );
        let c = corpus(&["1400/05/01", "1400/06/01", "1401/05/01", "1401/06/01"]);
        let t = yearly_topic_percentages(&m, &c, Normalization::PerTopic).unwrap();
        assert_eq!(t.counts, vec![vec![2, 1], vec![0, 1]]);
        assert!((t.percentages[0][0] - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(t.percentages[1], [0.0, 100.0]);
        let t = t.renormalized(Normalization::PerYear);
        assert_eq!(t.percentages[0], [100.0, 50.0]);
    }

    #[test]
    fn top_words_and_weights() {
        let m = model(
            vec![vec![1.0]],
            vec![vec![0.2, 0.5, 0.3]],
            &["c", "a", "b"],
        );
        assert_eq!(top_words(&m, 0, 2), [("a".to_string(), 0.5), ("b".to_string(), 0.3)]);
        let full = top_words(&m, 0, 3);
        assert!((full.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs() < 1e-9);
        let w = wordcloud_weights(&m, 0, 3);
        assert_eq!(w[0].1, 1.0);
        assert!((w[2].1 - 0.4).abs() < 1e-12);
    }

    #[test]
    fn ties_are_lexicographic() {
        let m = model(vec![vec![1.0]], vec![vec![0.25; 4]], &["d", "b", "a", "c"]);
        let terms: Vec<String> = top_words(&m, 0, 4).into_iter().map(|(t, _)| t).collect();
        assert_eq!(terms, ["a", "b", "c", "d"]);
        assert!(wordcloud_weights(&m, 0, 4).iter().all(|(_, w)| *w == 1.0));
    }

    #[test]
    fn labels() {
        let m = model(vec![vec![0.5, 0.5]], vec![vec![1.0], vec![1.0]], &["a"]);
        let map = parse_label_map("# names\n0\tEconomic\n").unwrap();
        let s = label_topics(&m, &map, 1).unwrap();
        assert_eq!(s[0].label, "Economic");
        assert_eq!(s[1].label, "topic-1");
        let s = label_topics(&m, &HashMap::new(), 1).unwrap();
        assert_eq!(s[0].label, "topic-0");

        let m3 = model(vec![vec![0.4, 0.3, 0.3]], vec![vec![1.0]; 3], &["a"]);
        let map = parse_label_map("5=Other").unwrap();
        assert!(matches!(label_topics(&m3, &map, 1), Err(AnalyzeError::UnknownTopicId(5))));
    }

    #[test]
    fn label_map_syntax() {
        assert!(matches!(
            parse_label_map("0 Economic"),
            Err(AnalyzeError::LabelSyntax { line: 1, .. })
        ));
        assert!(parse_label_map("x=Economic").is_err());
        assert!(parse_label_map("0=A\n0=B").is_err());
        assert!(parse_label_map("1=\n").is_err());
    }

    #[test]
    fn csv_layouts() {
        let m = model(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![0.75, 0.25], vec![0.5, 0.5]],
            &["a", "b"],
        );
        let c = corpus(&["1400/05/01", "1401/05/01"]);
        let mut buf = Vec::new();
        write_shares_csv(&topic_shares(&m, &c).unwrap(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "topic,count,percent\n0,1,50\n1,1,50\n");

        let mut buf = Vec::new();
        let t = yearly_topic_percentages(&m, &c, Normalization::PerTopic).unwrap();
        write_trends_csv(&t, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "topic,year,count,percent,normalization\n\
             0,2021,1,100,per_topic\n0,2022,0,0,per_topic\n\
             1,2021,0,0,per_topic\n1,2022,1,100,per_topic\n"
        );

        let mut buf = Vec::new();
        write_wordcloud_csv(&wordcloud_weights(&m, 0, 2), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "term,weight\na,1\nb,0.3333333333333333\n");
    }

    #[test]
    fn report_files() {
        let m = model(vec![vec![0.6, 0.4]], vec![vec![0.5, 0.5], vec![0.9, 0.1]], &["a", "b"]);
        let c = corpus(&["1400/05/01"]);
        let dir = tempfile::tempdir().unwrap();
        let files = write_report(&m, &c, &ReportOptions { top_m: 2, ..ReportOptions::default() }, dir.path()).unwrap();
        assert_eq!(
            files,
            ["topics.json", "shares.csv", "trends.csv", "wordcloud_0.csv", "wordcloud_1.csv"]
        );
        let json: Vec<TopicSummary> =
            serde_json::from_str(&fs::read_to_string(dir.path().join("topics.json")).unwrap()).unwrap();
        assert_eq!(json.len(), 2);
        assert!(write_report(&m, &c, &ReportOptions::default(), dir.path()).is_err());
    }
}
