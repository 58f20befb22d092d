//! Law records: loading, validation, filtering and per-year tallies.

mod date;
mod html;
pub mod synth;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::trend::{Normalization, TrendTable};

pub use date::{
    is_jalali_leap_year, jalali_month_length, jalali_to_gregorian, jalali_to_gregorian_year,
    GregorianDate, RecordDate,
};
pub use html::{parse_html_record, parse_html_record_with, DoticSelectors};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: invalid JSON: {message}")]
    Json { row: usize, message: String },
    #[error("row {row}: invalid CSV: {message}")]
    Csv { row: usize, message: String },
    #[error("row {row}: missing field `{field}`")]
    MissingField { row: usize, field: String },
    #[error("row {row}: duplicate id {id:?}")]
    DuplicateId { row: usize, id: String },
    #[error("row {row}: unknown law type {value:?}")]
    UnknownLawType { row: usize, value: String },
    #[error("malformed date {0:?}")]
    MalformedDate(String),
    #[error("row {row}: malformed date {raw:?}")]
    MalformedRowDate { row: usize, raw: String },
    #[error("row {row}: {reason}")]
    InvalidRecord { row: usize, reason: String },
    #[error("page structure mismatch: no `{0}` region")]
    StructureMismatch(String),
    #[error("record {id:?} has empty content")]
    EmptyContent { id: String },
    #[error("invalid synthetic corpus config: {0}")]
    InvalidConfig(String),
}

/// Document types published by the source site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LawType {
    News,
    Draft,
    Vote,
    Plan,
    Law,
    Bill,
    ParliamentDeliberation,
    Regulation,
    Opinion,
}

impl LawType {
    pub const ALL: [LawType; 9] = [
        LawType::News,
        LawType::Draft,
        LawType::Vote,
        LawType::Plan,
        LawType::Law,
        LawType::Bill,
        LawType::ParliamentDeliberation,
        LawType::Regulation,
        LawType::Opinion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LawType::News => "News",
            LawType::Draft => "Draft",
            LawType::Vote => "Vote",
            LawType::Plan => "Plan",
            LawType::Law => "Law",
            LawType::Bill => "Bill",
            LawType::ParliamentDeliberation => "ParliamentDeliberation",
            LawType::Regulation => "Regulation",
            LawType::Opinion => "Opinion",
        }
    }
}

impl fmt::Display for LawType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Accepts the canonical names plus the listing spellings
/// ("Parliament deliberations", "regulations", "parliament_deliberation").
impl FromStr for LawType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .flat_map(char::to_lowercase)
            .collect();
        let singular = key.strip_suffix('s').unwrap_or(&key);
        LawType::ALL
            .into_iter()
            .find(|t| {
                let name = t.as_str().to_lowercase();
                name == key || name == singular
            })
            .ok_or_else(|| s.to_string())
    }
}

impl Serialize for LawType {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> serde::Deserialize<'de> for LawType {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse()
            .map_err(|v| serde::de::Error::custom(format!("unknown law type {v:?}")))
    }
}

/// One published document. Serializes in canonical field order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawRecord {
    pub id: String,
    pub title: String,
    pub content: String,
    pub lead: String,
    pub tags: Vec<String>,
    pub classes: Vec<String>,
    pub law_type: LawType,
    pub category: String,
    pub date: RecordDate,
}

impl LawRecord {
    pub fn gregorian_year(&self) -> i32 {
        self.date.gregorian_year
    }

    fn check(&self, row: usize) -> Result<(), CorpusError> {
        if self.id.trim().is_empty() {
            return Err(CorpusError::InvalidRecord {
                row,
                reason: "empty id".into(),
            });
        }
        if self.title.trim().is_empty() {
            return Err(CorpusError::InvalidRecord {
                row,
                reason: format!("record {:?} has an empty title", self.id),
            });
        }
        Ok(())
    }
}

/// Title length over content length, in characters after trimming.
pub fn length_ratio(record: &LawRecord) -> Result<f64, CorpusError> {
    let content = record.content.trim().chars().count();
    if content == 0 {
        return Err(CorpusError::EmptyContent {
            id: record.id.clone(),
        });
    }
    Ok(record.title.trim().chars().count() as f64 / content as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    #[default]
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses the format from a file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Jsonl => "jsonl",
            CorpusFormat::Csv => "csv",
        })
    }
}

/// An ordered, id-unique collection of records.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    records: Vec<LawRecord>,
    pub source_description: String,
}

impl Corpus {
    /// Builds a corpus, checking record invariants and id uniqueness.
    /// Row numbers in errors are 1-based positions in `records`.
    pub fn new(
        records: Vec<LawRecord>,
        source_description: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            r.check(i + 1)?;
            if !seen.insert(r.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    row: i + 1,
                    id: r.id.clone(),
                });
            }
        }
        Ok(Self {
            records,
            source_description: source_description.into(),
        })
    }

    pub fn records(&self) -> &[LawRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LawRecord> {
        self.records.iter()
    }

    pub fn get(&self, id: &str) -> Option<&LawRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn into_records(self) -> Vec<LawRecord> {
        self.records
    }

    /// Writes canonical JSONL, one record per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Writes CSV with canonical headers; list fields are `;`-joined.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADERS)?;
        for r in &self.records {
            w.write_record([
                r.id.as_str(),
                &r.title,
                &r.content,
                &r.lead,
                &r.tags.join(";"),
                &r.classes.join(";"),
                r.law_type.as_str(),
                &r.category,
                &r.date.raw,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path, format: CorpusFormat) -> Result<(), CorpusError> {
        let io_err = |source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut out = std::io::BufWriter::new(file);
        match format {
            CorpusFormat::Jsonl => self.write_jsonl(&mut out).map_err(io_err)?,
            CorpusFormat::Csv => self.write_csv(&mut out).map_err(|e| CorpusError::Csv {
                row: 0,
                message: e.to_string(),
            })?,
        }
        out.flush().map_err(io_err)
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a LawRecord;
    type IntoIter = std::slice::Iter<'a, LawRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

const CSV_HEADERS: [&str; 9] = [
    "id", "title", "content", "lead", "tags", "classes", "law_type", "category", "date",
];

/// Loads a corpus file, preserving row order.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let records = match format {
        CorpusFormat::Jsonl => read_jsonl(BufReader::new(file))?,
        CorpusFormat::Csv => read_csv(file)?,
    };
    Corpus::new(records, path.display().to_string())
}

/// Reads JSONL records. Blank lines are skipped; rows are numbered by line.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<LawRecord>, CorpusError> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| CorpusError::Json {
            row,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| CorpusError::Json {
            row,
            message: e.to_string(),
        })?;
        let Value::Object(obj) = value else {
            return Err(CorpusError::Json {
                row,
                message: "expected an object".into(),
            });
        };
        let record = record_from_fields(row, &JsonFields(&obj))?;
        if !seen.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateId { row, id: record.id });
        }
        records.push(record);
    }
    Ok(records)
}

/// Reads CSV records. Rows are numbered from 1 after the header line.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<LawRecord>, CorpusError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CorpusError::Csv {
            row: 0,
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_lowercase())
        .collect();
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, result) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = result.map_err(|e| CorpusError::Csv {
            row,
            message: e.to_string(),
        })?;
        let cells: BTreeMap<&str, &str> = headers
            .iter()
            .map(String::as_str)
            .zip(rec.iter())
            .collect();
        let record = record_from_fields(row, &CsvFields(&cells))?;
        if !seen.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateId { row, id: record.id });
        }
        records.push(record);
    }
    Ok(records)
}

/// Field access shared by the JSONL and CSV readers.
trait FieldSource {
    fn text(&self, names: &[&str]) -> Option<String>;
    fn list(&self, names: &[&str]) -> Option<Vec<String>>;
}

struct JsonFields<'a>(&'a Map<String, Value>);

impl FieldSource for JsonFields<'_> {
    fn text(&self, names: &[&str]) -> Option<String> {
        names.iter().find_map(|n| match self.0.get(*n)? {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            _ => None,
        })
    }

    fn list(&self, names: &[&str]) -> Option<Vec<String>> {
        names.iter().find_map(|n| match self.0.get(*n)? {
            Value::Array(items) => items
                .iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect(),
            Value::String(s) => Some(split_list(s)),
            _ => None,
        })
    }
}

struct CsvFields<'a>(&'a BTreeMap<&'a str, &'a str>);

impl FieldSource for CsvFields<'_> {
    fn text(&self, names: &[&str]) -> Option<String> {
        names.iter().find_map(|n| self.0.get(n).map(|s| s.to_string()))
    }

    fn list(&self, names: &[&str]) -> Option<Vec<String>> {
        self.text(names).map(|s| split_list(&s))
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn record_from_fields(row: usize, src: &dyn FieldSource) -> Result<LawRecord, CorpusError> {
    let missing = |field: &str| CorpusError::MissingField {
        row,
        field: field.to_string(),
    };
    let id = src.text(&["id"]).ok_or_else(|| missing("id"))?;
    let title = src.text(&["title"]).ok_or_else(|| missing("title"))?;
    let content = src.text(&["content"]).ok_or_else(|| missing("content"))?;
    let lead = src.text(&["lead"]).unwrap_or_default();
    let tags = src.list(&["tags"]).ok_or_else(|| missing("tags"))?;
    let classes = src.list(&["classes"]).ok_or_else(|| missing("classes"))?;
    let type_text = src
        .text(&["law_type", "type"])
        .ok_or_else(|| missing("law_type"))?;
    let law_type = type_text
        .parse()
        .map_err(|value| CorpusError::UnknownLawType { row, value })?;
    let category = src
        .text(&["category", "categories"])
        .ok_or_else(|| missing("category"))?;
    let raw_date = src.text(&["date"]).ok_or_else(|| missing("date"))?;
    let date = RecordDate::parse(&raw_date)
        .map_err(|_| CorpusError::MalformedRowDate { row, raw: raw_date })?;
    let record = LawRecord {
        id,
        title,
        content,
        lead,
        tags,
        classes,
        law_type,
        category,
        date,
    };
    record.check(row)?;
    Ok(record)
}

/// Records of one type, order preserved.
pub fn filter_by_type(corpus: &Corpus, law_type: LawType) -> Corpus {
    Corpus {
        records: corpus
            .records
            .iter()
            .filter(|r| r.law_type == law_type)
            .cloned()
            .collect(),
        source_description: format!("{} [type={law_type}]", corpus.source_description),
    }
}

/// Record counts per law type (rows, enum order) and Gregorian year (columns, ascending).
/// Only types and years that occur get a row or column.
pub fn type_counts_by_year(corpus: &Corpus) -> TrendTable {
    let types: BTreeSet<LawType> = corpus.iter().map(|r| r.law_type).collect();
    let years: BTreeSet<i32> = corpus.iter().map(LawRecord::gregorian_year).collect();
    let types: Vec<LawType> = types.into_iter().collect();
    let years: Vec<i32> = years.into_iter().collect();
    let mut counts = vec![vec![0u64; years.len()]; types.len()];
    for r in corpus {
        let t = types.binary_search(&r.law_type).expect("type collected");
        let y = years.binary_search(&r.gregorian_year()).expect("year collected");
        counts[t][y] += 1;
    }
    TrendTable::new(
        types.iter().map(|t| t.to_string()).collect(),
        years.iter().map(|y| y.to_string()).collect(),
        counts,
        Normalization::PerTopic,
    )
}
