//! Corpus loading and automatic tokenization.
//!
//! Cleaning is regex-class based: URL tokens and RT markers are dropped,
//! leading `#`/`@` prefixes are stripped so hashtags and mentions survive as
//! ordinary terms, everything outside `[a-z0-9]` is removed after
//! lowercasing, and stopwords are filtered out.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Built-in English stopword list. Entries are stored pre-normalized with the
/// same character cleaning applied to tokens, so contractions match their
/// cleaned forms (`don't` -> `dont`).
const BASE_STOPWORDS: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "youre", "youve",
    "youll", "youd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
    "she", "shes", "her", "hers", "herself", "it", "its", "itself", "they", "them", "their",
    "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "thatll", "these",
    "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
    "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then",
    "once", "here", "there", "when", "where", "why", "how", "all", "any", "both", "each",
    "few", "more", "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same",
    "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "dont", "should",
    "shouldve", "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "arent", "couldn",
    "couldnt", "didn", "didnt", "doesn", "doesnt", "hadn", "hadnt", "hasn", "hasnt", "haven",
    "havent", "isn", "isnt", "ma", "mightn", "mightnt", "mustn", "mustnt", "needn", "neednt",
    "shan", "shant", "shouldn", "shouldnt", "wasn", "wasnt", "weren", "werent", "won", "wont",
    "wouldn", "wouldnt", "ed",
];

/// One raw input document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

/// Ordered lowercase tokens of one document after preprocessing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub doc_id: String,
    pub tokens: Vec<String>,
}

/// Input file format for [`load_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Tsv,
}

/// Stopword configuration: a fixed base list plus the fraction of the
/// vocabulary treated as domain-specific stopwords by the detector.
#[derive(Debug, Clone)]
pub struct StopwordPolicy {
    base_list: BTreeSet<String>,
    /// Fraction of the vocabulary removed as domain stopwords (`t_s`).
    pub domain_fraction: f64,
}

impl Default for StopwordPolicy {
    fn default() -> Self {
        StopwordPolicy {
            base_list: BASE_STOPWORDS.iter().map(|w| w.to_string()).collect(),
            domain_fraction: 0.01,
        }
    }
}

impl StopwordPolicy {
    /// Replace the base list with words loaded from a file, one per line.
    /// Each entry is normalized exactly like a token.
    pub fn from_file(path: &Path, domain_fraction: f64) -> Result<Self> {
        let content = read_to_string(path)?;
        Ok(Self::from_words(content.lines(), domain_fraction))
    }

    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>, domain_fraction: f64) -> Self {
        let base_list = words
            .into_iter()
            .filter_map(|w| {
                let cleaned = clean_token(&w.trim().to_lowercase());
                if cleaned.is_empty() {
                    None
                } else {
                    Some(cleaned)
                }
            })
            .collect();
        StopwordPolicy {
            base_list,
            domain_fraction,
        }
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.base_list.contains(token)
    }

    pub fn base_len(&self) -> usize {
        self.base_list.len()
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut buf = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut buf))
        .map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
    Ok(buf)
}

/// Load raw documents from a JSONL or TSV file, preserving file order.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<RawDocument>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let doc = match format {
            CorpusFormat::Jsonl => parse_jsonl_record(&line, lineno)?,
            CorpusFormat::Tsv => parse_tsv_record(&line, lineno)?,
        };
        docs.push(doc);
    }
    Ok(docs)
}

/// Parse one JSONL corpus record. Extra fields are ignored.
pub fn parse_jsonl_record(line: &str, lineno: usize) -> Result<RawDocument> {
    #[derive(Deserialize)]
    struct Record {
        id: serde_json::Value,
        text: String,
    }
    let record: Record = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
        line: lineno,
        message: e.to_string(),
    })?;
    let id = match record.id {
        serde_json::Value::String(s) => s,
        serde_json::Value::Number(n) => n.to_string(),
        other => {
            return Err(Error::MalformedRecord {
                line: lineno,
                message: format!("id must be a string or number, got {other}"),
            })
        }
    };
    if id.is_empty() {
        return Err(Error::MalformedRecord {
            line: lineno,
            message: "empty id".into(),
        });
    }
    Ok(RawDocument {
        id,
        text: record.text,
    })
}

/// Parse one `id<TAB>text` record. The text may itself contain tabs.
pub fn parse_tsv_record(line: &str, lineno: usize) -> Result<RawDocument> {
    let (id, text) = line.split_once('\t').ok_or_else(|| Error::MalformedRecord {
        line: lineno,
        message: "expected id<TAB>text".into(),
    })?;
    if id.is_empty() {
        return Err(Error::MalformedRecord {
            line: lineno,
            message: "empty id".into(),
        });
    }
    Ok(RawDocument {
        id: id.to_string(),
        text: text.to_string(),
    })
}

fn is_url(token: &str) -> bool {
    let lower = token.to_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// Keep only `[a-z0-9]` after lowercasing; `#`/`@` prefixes are stripped
/// before this runs so hashtags and mentions survive as plain terms.
fn clean_token(lowered: &str) -> String {
    lowered
        .trim_start_matches(['#', '@'])
        .chars()
        .filter(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        .collect()
}

/// Tokenize one document: lowercase, drop URLs / RT markers / emoticons and
/// standalone punctuation, strip `#`/`@` prefixes, remove stopwords. Token
/// order follows the text.
pub fn preprocess(doc: &RawDocument, policy: &StopwordPolicy) -> TokenStream {
    let tokens = doc
        .text
        .split_whitespace()
        .filter(|raw| !is_url(raw))
        .filter_map(|raw| {
            let cleaned = clean_token(&raw.to_lowercase());
            if cleaned.is_empty() || cleaned == "rt" || policy.is_stopword(&cleaned) {
                None
            } else {
                Some(cleaned)
            }
        })
        .collect();
    TokenStream {
        doc_id: doc.id.clone(),
        tokens,
    }
}

/// Remove an extra stopword set (e.g. domain stopwords) from a stream.
pub fn apply_stopwords(stream: &TokenStream, extra: &BTreeSet<String>) -> TokenStream {
    TokenStream {
        doc_id: stream.doc_id.clone(),
        tokens: stream
            .tokens
            .iter()
            .filter(|t| !extra.contains(*t))
            .cloned()
            .collect(),
    }
}

/// Number of domain stopwords for a vocabulary of `vocab` words at fraction
/// `t_s`: `ceil(t_s * vocab)` with a guard against float rounding drift.
fn domain_count(vocab: usize, t_s: f64) -> usize {
    if t_s <= 0.0 || vocab == 0 {
        return 0;
    }
    (t_s * vocab as f64 - 1e-9).ceil().max(0.0) as usize
}

/// The top `ceil(t_s * |vocabulary|)` most frequent tokens across `docs`.
/// Ties are broken lexicographically (the lower word enters the set first).
pub fn domain_stopwords(docs: &[TokenStream], t_s: f64) -> BTreeSet<String> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in docs {
        for token in &doc.tokens {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    let k = domain_count(counts.len(), t_s);
    top_frequent(counts, k)
}

/// Count-mode variant: exactly the `k` most frequent tokens.
pub fn domain_stopwords_count(docs: &[TokenStream], k: usize) -> BTreeSet<String> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for doc in docs {
        for token in &doc.tokens {
            *counts.entry(token).or_insert(0) += 1;
        }
    }
    top_frequent(counts, k)
}

fn top_frequent(counts: BTreeMap<&str, u64>, k: usize) -> BTreeSet<String> {
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked
        .into_iter()
        .take(k)
        .map(|(w, _)| w.to_string())
        .collect()
}
