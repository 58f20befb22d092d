//! Text cleanup: normalization, punctuation removal, tokenization, stopword
//! removal and lemmatization, applied in that order.
//!
//! Stopwords and lemma rules are plain data files so the language resources
//! can be swapped without code changes. A Persian sample of both ships with
//! the crate ([`PreprocessConfig::persian`]).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, LawRecord};

const PERSIAN_STOPWORDS: &str = include_str!("../resources/stopwords_fa.txt");
const PERSIAN_LEMMA_RULES: &str = include_str!("../resources/lemma_rules_fa.txt");

/// Stems must keep at least this many characters after a suffix rule.
const MIN_STEM_CHARS: usize = 2;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("lemma rules line {line}: {message}")]
    RuleSyntax { line: usize, message: String },
    #[error("invalid preprocessing config: {0}")]
    InvalidConfig(String),
    #[error("record {record_id:?} has no tokens after preprocessing")]
    EmptyDocument { record_id: String },
}

/// Exception lexicon plus ordered suffix-strip rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaRules {
    /// (suffix, replacement), longest suffix first.
    suffixes: Vec<(String, String)>,
    exceptions: HashMap<String, String>,
    /// Lexicon targets; never rewritten further.
    lemmas: HashSet<String>,
}

impl LemmaRules {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a suffix rule. The replacement must be shorter than the suffix.
    pub fn with_suffix(
        mut self,
        suffix: impl Into<String>,
        replacement: impl Into<String>,
    ) -> Result<Self, PreprocessError> {
        let suffix = suffix.into();
        let replacement = replacement.into();
        if suffix.is_empty() {
            return Err(PreprocessError::InvalidConfig("empty suffix".into()));
        }
        if replacement.chars().count() >= suffix.chars().count() {
            return Err(PreprocessError::InvalidConfig(format!(
                "replacement {replacement:?} is not shorter than suffix {suffix:?}"
            )));
        }
        self.suffixes.retain(|(s, _)| *s != suffix);
        self.suffixes.push((suffix, replacement));
        // Longest first; ties broken lexicographically so order is stable.
        self.suffixes.sort_by(|(a, _), (b, _)| {
            b.chars().count().cmp(&a.chars().count()).then_with(|| a.cmp(b))
        });
        Ok(self)
    }

    pub fn with_exception(
        mut self,
        word: impl Into<String>,
        lemma: impl Into<String>,
    ) -> Result<Self, PreprocessError> {
        let lemma = lemma.into();
        if lemma.is_empty() {
            return Err(PreprocessError::InvalidConfig("empty lemma".into()));
        }
        self.lemmas.insert(lemma.clone());
        self.exceptions.insert(word.into(), lemma);
        Ok(self)
    }

    /// Parses `suffix<TAB>replacement` and `word<TAB>=<TAB>lemma` lines.
    pub fn parse(text: &str) -> Result<Self, PreprocessError> {
        let mut rules = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let syntax = |message: String| PreprocessError::RuleSyntax {
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            rules = match fields.as_slice() {
                [word, "=", lemma] => rules
                    .with_exception(word.trim(), lemma.trim())
                    .map_err(|e| syntax(e.to_string()))?,
                [suffix, replacement] => rules
                    .with_suffix(suffix.trim(), replacement.trim())
                    .map_err(|e| syntax(e.to_string()))?,
                _ => return Err(syntax(format!("expected 2 or 3 tab-separated fields: {line:?}"))),
            };
        }
        Ok(rules)
    }

    pub fn from_file(path: &Path) -> Result<Self, PreprocessError> {
        let text = std::fs::read_to_string(path).map_err(|source| PreprocessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn is_empty(&self) -> bool {
        self.suffixes.is_empty() && self.exceptions.is_empty()
    }

    fn strip_suffix(&self, token: &str) -> Option<String> {
        let len = token.chars().count();
        self.suffixes.iter().find_map(|(suffix, replacement)| {
            let stem = token.strip_suffix(suffix.as_str())?;
            (len - suffix.chars().count() >= MIN_STEM_CHARS)
                .then(|| format!("{stem}{replacement}"))
        })
    }

    /// Lexicon first, then suffix rules, repeated until nothing applies.
    /// Lexicon targets are fixed points, and each suffix step shortens the
    /// token, so the loop terminates and the result is stable.
    pub fn lemmatize_token(&self, token: &str) -> String {
        let mut current = token.to_string();
        loop {
            if self.lemmas.contains(&current) {
                return current;
            }
            if let Some(lemma) = self.exceptions.get(&current) {
                current = lemma.clone();
                continue;
            }
            match self.strip_suffix(&current) {
                Some(stripped) => current = stripped,
                None => return current,
            }
        }
    }

    fn strings(&self) -> impl Iterator<Item = &str> {
        self.suffixes
            .iter()
            .flat_map(|(s, r)| [s.as_str(), r.as_str()])
            .chain(self.exceptions.iter().flat_map(|(w, l)| [w.as_str(), l.as_str()]))
    }
}

/// Parses a stopword file: one token per line, `#` starts a comment line.
pub fn parse_stopwords(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn default_punctuation() -> BTreeSet<char> {
    let mut set: BTreeSet<char> = (0u8..=127)
        .map(char::from)
        .filter(char::is_ascii_punctuation)
        .collect();
    set.extend([
        '\u{060C}', // Arabic comma
        '\u{061B}', // Arabic semicolon
        '\u{061F}', // Arabic question mark
        '\u{066A}', // Arabic percent
        '\u{066B}', // Arabic decimal separator
        '\u{066C}', // Arabic thousands separator
        '\u{0640}', // tatweel
        '«', '»', '…', '–', '—', '“', '”', '‘', '’', '•', '·',
    ]);
    set
}

fn default_char_map() -> BTreeMap<char, char> {
    let mut map = BTreeMap::from([
        ('\u{064A}', '\u{06CC}'), // Arabic Yeh -> Farsi Yeh
        ('\u{0649}', '\u{06CC}'), // Alef Maksura -> Farsi Yeh
        ('\u{0643}', '\u{06A9}'), // Arabic Kaf -> Keheh
        ('\u{0629}', '\u{0647}'), // Teh Marbuta -> Heh
    ]);
    for (i, latin) in ('0'..='9').enumerate() {
        map.insert(char::from_u32(0x06F0 + i as u32).unwrap(), latin);
        map.insert(char::from_u32(0x0660 + i as u32).unwrap(), latin);
    }
    map
}

/// Resources and switches for the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    stopwords: HashSet<String>,
    punctuation: BTreeSet<char>,
    lemma_rules: LemmaRules,
    min_token_length: usize,
    normalize_chars: BTreeMap<char, char>,
    lowercase: bool,
}

impl Default for PreprocessConfig {
    /// No stopwords, no lemma rules, default punctuation and character map,
    /// lowercasing on, minimum token length 2.
    fn default() -> Self {
        Self {
            stopwords: HashSet::new(),
            punctuation: default_punctuation(),
            lemma_rules: LemmaRules::new(),
            min_token_length: 2,
            normalize_chars: default_char_map(),
            lowercase: true,
        }
    }
}

impl PreprocessConfig {
    /// Defaults plus the bundled Persian stopwords and lemma rules.
    pub fn persian() -> Self {
        let rules = LemmaRules::parse(PERSIAN_LEMMA_RULES).expect("bundled lemma rules parse");
        Self::default()
            .with_stopwords(parse_stopwords(PERSIAN_STOPWORDS))
            .with_lemma_rules(rules)
    }

    /// Replaces the stopword list; entries are stored normalized.
    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let stopwords = words
            .into_iter()
            .map(|w| normalize(w.as_ref(), &self))
            .filter(|w| !w.is_empty())
            .collect();
        self.stopwords = stopwords;
        self
    }

    pub fn with_stopword_file(self, path: &Path) -> Result<Self, PreprocessError> {
        let text = std::fs::read_to_string(path).map_err(|source| PreprocessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(self.with_stopwords(parse_stopwords(&text)))
    }

    pub fn with_lemma_rules(mut self, rules: LemmaRules) -> Self {
        self.lemma_rules = rules;
        self
    }

    pub fn with_min_token_length(mut self, n: usize) -> Self {
        self.min_token_length = n;
        self
    }

    pub fn with_punctuation(mut self, punctuation: impl IntoIterator<Item = char>) -> Self {
        self.punctuation = punctuation.into_iter().collect();
        self
    }

    /// Replaces the character map. Stopwords are re-normalized under it.
    pub fn with_normalize_chars(mut self, map: BTreeMap<char, char>) -> Self {
        self.normalize_chars = map;
        let words: Vec<String> = self.stopwords.drain().collect();
        self.with_stopwords(words)
    }

    pub fn with_lowercase(mut self, lowercase: bool) -> Self {
        self.lowercase = lowercase;
        let words: Vec<String> = self.stopwords.drain().collect();
        self.with_stopwords(words)
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    pub fn punctuation(&self) -> &BTreeSet<char> {
        &self.punctuation
    }

    pub fn lemma_rules(&self) -> &LemmaRules {
        &self.lemma_rules
    }

    pub fn min_token_length(&self) -> usize {
        self.min_token_length
    }

    /// Checks the properties the pipeline relies on: the character map is
    /// idempotent and lemma rules cannot introduce whitespace or punctuation.
    pub fn validate(&self) -> Result<(), PreprocessError> {
        let invalid = |m: String| Err(PreprocessError::InvalidConfig(m));
        if self.min_token_length == 0 {
            return invalid("min_token_length must be at least 1".into());
        }
        if let Some((from, to)) = self
            .normalize_chars
            .iter()
            .find(|(_, to)| self.normalize_chars.contains_key(to))
        {
            return invalid(format!(
                "character map is not idempotent: {from:?} -> {to:?} -> {:?}",
                self.normalize_chars[to]
            ));
        }
        for s in self.lemma_rules.strings() {
            if s.chars().any(|c| c.is_whitespace() || self.punctuation.contains(&c)) {
                return invalid(format!("lemma rule text {s:?} contains whitespace or punctuation"));
            }
        }
        Ok(())
    }

    /// Runs every stage over `text`.
    pub fn tokens(&self, text: &str) -> Vec<String> {
        let text = normalize(text, self);
        let text = remove_punctuation(&text, self);
        let tokens = tokenize(&text, self);
        let tokens = remove_stopwords(tokens, &self.stopwords);
        let tokens = lemmatize(tokens, &self.lemma_rules);
        // A lemma can land on a stopword or fall under the length floor.
        tokens
            .into_iter()
            .filter(|t| t.chars().count() >= self.min_token_length && !self.stopwords.contains(t))
            .collect()
    }
}

/// Character substitutions, optional lowercasing, whitespace collapse and trim.
pub fn normalize(text: &str, config: &PreprocessConfig) -> String {
    let mapped = text
        .chars()
        .map(|c| config.normalize_chars.get(&c).copied().unwrap_or(c));
    let mapped: String = if config.lowercase {
        mapped.flat_map(char::to_lowercase).collect()
    } else {
        mapped.collect()
    };
    mapped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Replaces each punctuation character with one space.
pub fn remove_punctuation(text: &str, config: &PreprocessConfig) -> String {
    text.chars()
        .map(|c| if config.punctuation.contains(&c) { ' ' } else { c })
        .collect()
}

/// Whitespace split, dropping tokens shorter than the configured minimum.
pub fn tokenize(text: &str, config: &PreprocessConfig) -> Vec<String> {
    text.split_whitespace()
        .filter(|t| t.chars().count() >= config.min_token_length)
        .map(str::to_string)
        .collect()
}

pub fn remove_stopwords(tokens: Vec<String>, stopwords: &HashSet<String>) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect()
}

pub fn lemmatize(tokens: Vec<String>, rules: &LemmaRules) -> Vec<String> {
    if rules.is_empty() {
        return tokens;
    }
    tokens.iter().map(|t| rules.lemmatize_token(t)).collect()
}

/// A record's modeling text as a token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub record_id: String,
    pub tokens: Vec<String>,
    pub gregorian_year: i32,
}

/// Tokens of title + " " + content.
pub fn preprocess_document(
    record: &LawRecord,
    config: &PreprocessConfig,
) -> Result<Document, PreprocessError> {
    let text = format!("{} {}", record.title, record.content);
    let tokens = config.tokens(&text);
    if tokens.is_empty() {
        return Err(PreprocessError::EmptyDocument {
            record_id: record.id.clone(),
        });
    }
    Ok(Document {
        record_id: record.id.clone(),
        tokens,
        gregorian_year: record.gregorian_year(),
    })
}

/// Documents for every record that yields tokens, plus ids of those that did not.
pub fn preprocess_corpus(corpus: &Corpus, config: &PreprocessConfig) -> (Vec<Document>, Vec<String>) {
    let mut docs = Vec::with_capacity(corpus.len());
    let mut empty = Vec::new();
    for record in corpus {
        match preprocess_document(record, config) {
            Ok(doc) => docs.push(doc),
            Err(_) => empty.push(record.id.clone()),
        }
    }
    (docs, empty)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// Records with an empty title, content or category.
    pub null_fields: Vec<String>,
    /// Records whose text yields no tokens.
    pub empty_after_preprocess: Vec<String>,
}

impl ValidationReport {
    pub fn is_model_ready(&self) -> bool {
        self.null_fields.is_empty() && self.empty_after_preprocess.is_empty()
    }
}

pub fn validate_nonempty(corpus: &Corpus, config: &PreprocessConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    for r in corpus {
        if [&r.title, &r.content, &r.category]
            .iter()
            .any(|f| f.trim().is_empty())
        {
            report.null_fields.push(r.id.clone());
        }
        if preprocess_document(r, config).is_err() {
            report.empty_after_preprocess.push(r.id.clone());
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LawType, RecordDate};

    fn record(title: &str, content: &str) -> LawRecord {
        LawRecord {
            id: "r1".into(),
            title: title.into(),
            content: content.into(),
            lead: String::new(),
            tags: vec![],
            classes: vec![],
            law_type: LawType::Regulation,
            category: "c".into(),
            date: RecordDate::parse("1402/04/04").unwrap(),
        }
    }

    #[test]
    fn whitespace_collapse() {
        assert_eq!(normalize("a  b\tc", &PreprocessConfig::default()), "a b c");
        assert_eq!(normalize("  x \n", &PreprocessConfig::default()), "x");
    }

    #[test]
    fn persian_digits_and_letters() {
        let cfg = PreprocessConfig::default();
        assert!(normalize("ماده ۴۵", &cfg).contains("45"));
        assert_eq!(normalize("٢٠", &cfg), "20");
        assert_eq!(normalize("\u{064A}\u{0643}", &cfg), "\u{06CC}\u{06A9}");
    }

    #[test]
    fn punctuation_becomes_space() {
        let cfg = PreprocessConfig::default();
        assert_eq!(remove_punctuation("a,b.c", &cfg), "a b c");
        assert_eq!(remove_punctuation("abc", &cfg), "abc");
        assert_eq!(remove_punctuation("(1402)", &cfg), " 1402 ");
        assert_eq!(remove_punctuation("قانون، بودجه؛", &cfg), "قانون  بودجه ");
    }

    #[test]
    fn tokenize_cases() {
        let cfg = PreprocessConfig::default().with_min_token_length(1);
        assert_eq!(tokenize("the quick fox", &cfg), ["the", "quick", "fox"]);
        assert!(tokenize("", &cfg).is_empty());
        let cfg = cfg.with_min_token_length(2);
        assert_eq!(tokenize("a bb ccc", &cfg), ["bb", "ccc"]);
    }

    #[test]
    fn stopword_cases() {
        let toks = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let stop: HashSet<String> = ["in", "of"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            remove_stopwords(toks(&["in", "law", "of", "court"]), &stop),
            ["law", "court"]
        );
        assert_eq!(
            remove_stopwords(toks(&["in", "law"]), &HashSet::new()),
            ["in", "law"]
        );
        assert!(remove_stopwords(toks(&["in", "of", "in"]), &stop).is_empty());
    }

    #[test]
    fn lemma_cases() {
        let rules = LemmaRules::new()
            .with_exception("went", "go")
            .unwrap()
            .with_suffix("ha", "")
            .unwrap()
            .with_suffix("ing", "")
            .unwrap();
        assert_eq!(rules.lemmatize_token("went"), "go");
        assert_eq!(rules.lemmatize_token("ketabha"), "ketab");
        assert_eq!(rules.lemmatize_token("ha"), "ha");
        assert_eq!(rules.lemmatize_token("x"), "x");
        // Stem would be shorter than two characters.
        assert_eq!(rules.lemmatize_token("aha"), "aha");
        // Stacked suffixes reduce to a fixed point.
        assert_eq!(rules.lemmatize_token("ketabhaha"), "ketab");
    }

    #[test]
    fn longest_suffix_wins() {
        let rules = LemmaRules::parse("ha\t\nhaye\t\n").unwrap();
        assert_eq!(rules.lemmatize_token("ketabhaye"), "ketab");
    }

    #[test]
    fn rule_file_syntax() {
        let rules = LemmaRules::parse("# comment\n\nwent\t=\tgo\nies\ty\n").unwrap();
        assert_eq!(rules.lemmatize_token("went"), "go");
        assert_eq!(rules.lemmatize_token("policies"), "policy");
        assert!(matches!(
            LemmaRules::parse("a\tb\tc\td"),
            Err(PreprocessError::RuleSyntax { line: 1, .. })
        ));
        assert!(LemmaRules::parse("s\tlonger").is_err());
    }

    #[test]
    fn bundled_persian_resources() {
        let cfg = PreprocessConfig::persian();
        cfg.validate().unwrap();
        assert!(cfg.stopwords().contains("در"));
        let toks = cfg.tokens("قوانین بودجه در سال ۱۴۰۲، کتاب‌ها");
        assert_eq!(toks, ["قانون", "بودجه", "1402", "کتاب"]);
    }

    #[test]
    fn document_trace() {
        let cfg = PreprocessConfig::default().with_stopwords(["of"]);
        let doc = preprocess_document(&record("Budget law", "of 1402, amended"), &cfg).unwrap();
        assert_eq!(doc.tokens, ["budget", "law", "1402", "amended"]);
        assert_eq!(doc.gregorian_year, 2023);
    }

    #[test]
    fn all_stopwords_is_empty_document() {
        let cfg = PreprocessConfig::default().with_stopwords(["of", "the"]);
        assert!(matches!(
            preprocess_document(&record("The", "of the"), &cfg),
            Err(PreprocessError::EmptyDocument { record_id }) if record_id == "r1"
        ));
    }

    #[test]
    fn lemma_landing_on_stopword_is_dropped() {
        let rules = LemmaRules::parse("thes\t=\tthe\n").unwrap();
        let cfg = PreprocessConfig::default()
            .with_stopwords(["the"])
            .with_lemma_rules(rules);
        assert_eq!(cfg.tokens("thes court"), ["court"]);
    }

    #[test]
    fn validation_report() {
        let cfg = PreprocessConfig::default();
        let mut a = record("Title", "content");
        a.id = "a".into();
        let mut b = record("Title", "  ");
        b.id = "b".into();
        let mut c = record("!!", "?? ,,");
        c.id = "c".into();
        let corpus = Corpus::new(vec![a.clone()], "clean").unwrap();
        assert!(validate_nonempty(&corpus, &cfg).is_model_ready());
        let corpus = Corpus::new(vec![a, b, c], "dirty").unwrap();
        let report = validate_nonempty(&corpus, &cfg);
        assert_eq!(report.null_fields, ["b"]);
        assert_eq!(report.empty_after_preprocess, ["c"]);
    }

    #[test]
    fn config_validation() {
        let mut map = default_char_map();
        map.insert('\u{06CC}', 'y');
        let cfg = PreprocessConfig::default().with_normalize_chars(map);
        assert!(cfg.validate().is_err());
        let cfg = PreprocessConfig::default()
            .with_lemma_rules(LemmaRules::new().with_exception("a.b", "ab").unwrap());
        assert!(cfg.validate().is_err());
        assert!(PreprocessConfig::default()
            .with_min_token_length(0)
            .validate()
            .is_err());
    }
}
