//! Evaluation of extracted phrases and events against ground-truth topics:
//! precision/recall/F, ROUGE-1/2/L, Bpref, topic-level recall and precision,
//! and redundancy.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{self, RawDocument, StopwordPolicy};
use crate::{Error, Result};

pub type TokenSet = BTreeSet<String>;

/// Annotated topics; keyword sets are normalized with the corpus pipeline.
#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    pub topics: BTreeMap<String, Topic>,
    /// Optional document-to-topic relevance assignments.
    pub relevance: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Topic {
    pub title: String,
    pub keywords: Vec<String>,
}

impl Topic {
    pub fn keyword_set(&self) -> TokenSet {
        self.keywords.iter().cloned().collect()
    }
}

impl GroundTruth {
    /// Load topics from JSONL records `{topic_id, title, keywords: [...]}`.
    /// Keywords run through the same preprocessing as corpus text.
    pub fn load_topics(path: &Path, policy: &StopwordPolicy) -> Result<GroundTruth> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut truth = GroundTruth::default();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (id, topic) = parse_topic_record(line, idx + 1, policy)?;
            truth.topics.insert(id, topic);
        }
        Ok(truth)
    }

    /// Load `doc_id<TAB>topic_id` relevance assignments.
    pub fn load_relevance(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (doc_id, topic_id) = parse_relevance_record(line, idx + 1)?;
            self.relevance.insert(doc_id, topic_id);
        }
        Ok(())
    }
}

/// Parse one topic JSONL record, normalizing keywords through the corpus
/// pipeline.
pub fn parse_topic_record(
    line: &str,
    lineno: usize,
    policy: &StopwordPolicy,
) -> Result<(String, Topic)> {
    #[derive(Deserialize)]
    struct Record {
        topic_id: serde_json::Value,
        #[serde(default)]
        title: String,
        keywords: Vec<String>,
    }
    let record: Record = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
        line: lineno,
        message: e.to_string(),
    })?;
    let id = match record.topic_id {
        serde_json::Value::String(s) => s,
        serde_json::Value::Number(n) => n.to_string(),
        other => {
            return Err(Error::MalformedRecord {
                line: lineno,
                message: format!("topic_id must be string or number, got {other}"),
            })
        }
    };
    if id.is_empty() {
        return Err(Error::MalformedRecord {
            line: lineno,
            message: "empty topic_id".into(),
        });
    }
    let keywords = normalize_tokens(&record.keywords.join(" "), policy);
    Ok((
        id,
        Topic {
            title: record.title,
            keywords,
        },
    ))
}

/// Parse one `doc_id<TAB>topic_id` line.
pub fn parse_relevance_record(line: &str, lineno: usize) -> Result<(String, String)> {
    let (doc_id, topic_id) = line.split_once('\t').ok_or_else(|| Error::MalformedRecord {
        line: lineno,
        message: "expected doc_id<TAB>topic_id".into(),
    })?;
    if doc_id.is_empty() || topic_id.trim().is_empty() {
        return Err(Error::MalformedRecord {
            line: lineno,
            message: "empty field".into(),
        });
    }
    Ok((doc_id.to_string(), topic_id.trim().to_string()))
}

/// Parse a run file: either JSON Lines with a `words` array per object, or
/// one JSON array of such objects.
pub fn parse_run_candidates(text: &str) -> Result<Vec<Vec<String>>> {
    #[derive(Deserialize)]
    struct WordsRecord {
        words: Vec<String>,
    }
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        let records: Vec<WordsRecord> =
            serde_json::from_str(trimmed).map_err(|e| Error::MalformedRecord {
                line: 0,
                message: e.to_string(),
            })?;
        return Ok(records.into_iter().map(|r| r.words).collect());
    }
    let mut candidates = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: WordsRecord =
            serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
                line: idx + 1,
                message: e.to_string(),
            })?;
        candidates.push(record.words);
    }
    Ok(candidates)
}

/// Run `text` through the corpus preprocessing and return its tokens.
pub fn normalize_tokens(text: &str, policy: &StopwordPolicy) -> Vec<String> {
    corpus::preprocess(
        &RawDocument {
            id: "normalize".into(),
            text: text.to_string(),
        },
        policy,
    )
    .tokens
}

/// Recall, precision, and F-measure of a candidate token set against a
/// non-empty reference set.
pub fn prf(candidate: &TokenSet, reference: &TokenSet) -> Result<(f64, f64, f64)> {
    if reference.is_empty() {
        return Err(Error::Contract("reference set must be non-empty".into()));
    }
    let overlap = candidate.intersection(reference).count() as f64;
    let recall = overlap / reference.len() as f64;
    let precision = if candidate.is_empty() {
        0.0
    } else {
        overlap / candidate.len() as f64
    };
    let f = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok((recall, precision, f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RougeVariant {
    R1,
    R2,
    Rl,
}

/// ROUGE-1/2 count distinct shared n-grams over distinct reference n-grams
/// (duplicates removed before intersection); ROUGE-L is LCS length over
/// reference length.
pub fn rouge(candidate: &[String], reference: &[String], variant: RougeVariant) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::Contract("reference must be non-empty".into()));
    }
    match variant {
        RougeVariant::R1 => Ok(ngram_overlap(candidate, reference, 1)),
        RougeVariant::R2 => {
            if reference.len() < 2 {
                return Ok(0.0);
            }
            Ok(ngram_overlap(candidate, reference, 2))
        }
        RougeVariant::Rl => Ok(lcs_len(candidate, reference) as f64 / reference.len() as f64),
    }
}

fn ngrams(tokens: &[String], n: usize) -> BTreeSet<Vec<&str>> {
    if tokens.len() < n {
        return BTreeSet::new();
    }
    tokens
        .windows(n)
        .map(|w| w.iter().map(|s| s.as_str()).collect())
        .collect()
}

fn ngram_overlap(candidate: &[String], reference: &[String], n: usize) -> f64 {
    let cand = ngrams(candidate, n);
    let refs = ngrams(reference, n);
    if refs.is_empty() {
        return 0.0;
    }
    cand.intersection(&refs).count() as f64 / refs.len() as f64
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Binary preference of an ordered extraction against a correct set:
/// `(1/|R|) * sum over correct r of (1 - incorrect_above(r) / M)` where `R`
/// is the correct extracted keywords and `M` the extraction length.
pub fn bpref(extracted: &[String], correct: &TokenSet) -> Result<f64> {
    if extracted.is_empty() {
        return Err(Error::Contract("extracted list must be non-empty".into()));
    }
    let m = extracted.len() as f64;
    let mut seen = BTreeSet::new();
    let mut incorrect_above = 0usize;
    let mut total = 0.0;
    let mut r_count = 0usize;
    for word in extracted {
        if correct.contains(word) {
            if seen.insert(word.clone()) {
                total += 1.0 - incorrect_above as f64 / m;
                r_count += 1;
            }
        } else {
            incorrect_above += 1;
        }
    }
    if r_count == 0 {
        return Ok(0.0);
    }
    Ok(total / r_count as f64)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TopicMetrics {
    pub t_rec: f64,
    pub k_rec: f64,
    pub k_prec: f64,
    pub detected_topics: usize,
    pub total_topics: usize,
}

/// Topic detection at `match_fraction`: a topic is detected when a candidate
/// covers at least `ceil(fraction * |keywords|)` of its keywords. K-REC and
/// K-PREC aggregate over the matched topic and candidate sides.
pub fn topic_metrics(
    candidates: &[TokenSet],
    truth: &GroundTruth,
    match_fraction: f64,
) -> Result<TopicMetrics> {
    if truth.topics.is_empty() {
        return Err(Error::Contract("ground truth has no topics".into()));
    }
    if !(match_fraction > 0.0 && match_fraction <= 1.0) {
        return Err(Error::Parameter("match_fraction must be in (0, 1]".into()));
    }
    let topics: Vec<(&String, TokenSet)> = truth
        .topics
        .iter()
        .map(|(id, t)| (id, t.keyword_set()))
        .collect();

    // matched_pairs[t] = candidate indices matching topic t
    let mut topic_matches: Vec<Vec<usize>> = vec![Vec::new(); topics.len()];
    let mut candidate_matches: Vec<Vec<usize>> = vec![Vec::new(); candidates.len()];
    for (ti, (_, keywords)) in topics.iter().enumerate() {
        if keywords.is_empty() {
            continue;
        }
        let needed =
            ((match_fraction * keywords.len() as f64 - 1e-9).ceil().max(1.0)) as usize;
        for (ci, cand) in candidates.iter().enumerate() {
            if cand.intersection(keywords).count() >= needed {
                topic_matches[ti].push(ci);
                candidate_matches[ci].push(ti);
            }
        }
    }

    let detected = topic_matches.iter().filter(|m| !m.is_empty()).count();
    let t_rec = detected as f64 / topics.len() as f64;

    // K-REC: over matched topics, keywords covered by any matching candidate.
    let mut covered = 0usize;
    let mut keyword_total = 0usize;
    for (ti, matches) in topic_matches.iter().enumerate() {
        if matches.is_empty() {
            continue;
        }
        let keywords = &topics[ti].1;
        keyword_total += keywords.len();
        let mut union: TokenSet = TokenSet::new();
        for &ci in matches {
            union.extend(candidates[ci].intersection(keywords).cloned());
        }
        covered += union.len();
    }
    let k_rec = if keyword_total == 0 {
        0.0
    } else {
        covered as f64 / keyword_total as f64
    };

    // K-PREC: over matched candidates, emitted words that hit any matched
    // topic's keywords.
    let mut correct = 0usize;
    let mut emitted = 0usize;
    for (ci, matches) in candidate_matches.iter().enumerate() {
        if matches.is_empty() {
            continue;
        }
        emitted += candidates[ci].len();
        let mut union: TokenSet = TokenSet::new();
        for &ti in matches {
            union.extend(topics[ti].1.iter().cloned());
        }
        correct += candidates[ci].intersection(&union).count();
    }
    let k_prec = if emitted == 0 {
        0.0
    } else {
        correct as f64 / emitted as f64
    };

    Ok(TopicMetrics {
        t_rec,
        k_rec,
        k_prec,
        detected_topics: detected,
        total_topics: topics.len(),
    })
}

/// Fraction of phrases whose token-set Jaccard similarity with any earlier
/// phrase exceeds `overlap`.
pub fn redundancy(phrases: &[TokenSet], overlap: f64) -> Result<f64> {
    if !(overlap > 0.0 && overlap <= 1.0) {
        return Err(Error::Parameter("overlap must be in (0, 1]".into()));
    }
    if phrases.is_empty() {
        return Ok(0.0);
    }
    let mut redundant = 0usize;
    for (i, phrase) in phrases.iter().enumerate() {
        for earlier in &phrases[..i] {
            if jaccard(phrase, earlier) > overlap {
                redundant += 1;
                break;
            }
        }
    }
    Ok(redundant as f64 / phrases.len() as f64)
}

fn jaccard(a: &TokenSet, b: &TokenSet) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    inter / union
}

/// Full per-run report over ordered candidate phrases. PRF and ROUGE average
/// over topics scored against their best-F candidate (undetected topics
/// contribute zero); Bpref flattens the candidates in rank order against the
/// union of topic keywords.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub recall: f64,
    pub precision: f64,
    pub f_measure: f64,
    pub rouge_1: f64,
    pub rouge_2: f64,
    pub rouge_l: f64,
    pub bpref: f64,
    pub t_rec: f64,
    pub k_rec: f64,
    pub k_prec: f64,
    pub redundancy: f64,
    pub detected_topics: usize,
    pub total_topics: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvalOptions {
    pub match_fraction: f64,
    pub redundancy_overlap: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            match_fraction: 0.5,
            redundancy_overlap: 0.5,
        }
    }
}

pub fn evaluate_run(
    candidates: &[Vec<String>],
    truth: &GroundTruth,
    options: EvalOptions,
) -> Result<EvalReport> {
    let candidate_sets: Vec<TokenSet> = candidates
        .iter()
        .map(|c| c.iter().cloned().collect())
        .collect();
    let topic = topic_metrics(&candidate_sets, truth, options.match_fraction)?;

    let mut recall_sum = 0.0;
    let mut precision_sum = 0.0;
    let mut f_sum = 0.0;
    let mut r1_sum = 0.0;
    let mut r2_sum = 0.0;
    let mut rl_sum = 0.0;
    let mut scored_topics = 0usize;
    for t in truth.topics.values() {
        let reference_set = t.keyword_set();
        if reference_set.is_empty() {
            continue;
        }
        scored_topics += 1;
        let mut best: Option<(f64, usize)> = None;
        for (ci, cand) in candidate_sets.iter().enumerate() {
            let (_, _, f) = prf(cand, &reference_set)?;
            if best.map(|(bf, _)| f > bf).unwrap_or(true) {
                best = Some((f, ci));
            }
        }
        if let Some((_, ci)) = best {
            let (r, p, f) = prf(&candidate_sets[ci], &reference_set)?;
            recall_sum += r;
            precision_sum += p;
            f_sum += f;
            r1_sum += rouge(&candidates[ci], &t.keywords, RougeVariant::R1)?;
            r2_sum += rouge(&candidates[ci], &t.keywords, RougeVariant::R2)?;
            rl_sum += rouge(&candidates[ci], &t.keywords, RougeVariant::Rl)?;
        }
    }
    let n = scored_topics.max(1) as f64;

    let all_keywords: TokenSet = truth
        .topics
        .values()
        .flat_map(|t| t.keywords.iter().cloned())
        .collect();
    let mut flattened: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    for cand in candidates {
        for word in cand {
            if seen.insert(word.clone()) {
                flattened.push(word.clone());
            }
        }
    }
    let bpref_score = if flattened.is_empty() {
        0.0
    } else {
        bpref(&flattened, &all_keywords)?
    };

    let redundancy_score = redundancy(&candidate_sets, options.redundancy_overlap)?;

    Ok(EvalReport {
        recall: recall_sum / n,
        precision: precision_sum / n,
        f_measure: f_sum / n,
        rouge_1: r1_sum / n,
        rouge_2: r2_sum / n,
        rouge_l: rl_sum / n,
        bpref: bpref_score,
        t_rec: topic.t_rec,
        k_rec: topic.k_rec,
        k_prec: topic.k_prec,
        redundancy: redundancy_score,
        detected_topics: topic.detected_topics,
        total_topics: topic.total_topics,
    })
}
