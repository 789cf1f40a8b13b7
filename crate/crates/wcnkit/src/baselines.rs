//! Baseline keyword scoring over a WCN: graph metrics, centralities, TF-IDF,
//! HITS, and the random-walk rankers TextRank, NERank, and the simplified
//! single-word TopicRank.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::corpus::TokenStream;
use crate::wcn::{WcnGraph, WordId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Degree,
    Strength,
    Selectivity,
    Betweenness,
    Closeness,
    Eigenvector,
    Eccentricity,
    ClusteringCoefficient,
    TfIdf,
    HitsMax,
    HitsAvg,
    Textrank,
    Nerank,
    Topicrank,
}

impl Metric {
    pub const ALL: [Metric; 14] = [
        Metric::Degree,
        Metric::Strength,
        Metric::Selectivity,
        Metric::Betweenness,
        Metric::Closeness,
        Metric::Eigenvector,
        Metric::Eccentricity,
        Metric::ClusteringCoefficient,
        Metric::TfIdf,
        Metric::HitsMax,
        Metric::HitsAvg,
        Metric::Textrank,
        Metric::Nerank,
        Metric::Topicrank,
    ];

    pub fn parse(name: &str) -> Result<Metric> {
        serde_json::from_value(serde_json::Value::String(name.to_string()))
            .map_err(|_| Error::Parameter(format!("unknown metric: {name}")))
    }

    pub fn name(&self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(|s| s.to_string()))
            .unwrap_or_default()
    }
}

/// One score per graph node for a metric.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreTable {
    pub metric: Metric,
    pub scores: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Corpus-level counts consumed by TF-IDF, NERank, and TopicRank. Token
/// offsets index the concatenated corpus.
#[derive(Debug, Clone, Default)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub doc_frequency: BTreeMap<String, usize>,
    pub term_frequency: BTreeMap<String, u64>,
    pub total_tokens: u64,
    positions: BTreeMap<String, Vec<u64>>,
}

impl CorpusStats {
    pub fn from_streams(docs: &[TokenStream]) -> CorpusStats {
        let mut stats = CorpusStats {
            doc_count: docs.len(),
            ..CorpusStats::default()
        };
        let mut offset = 0u64;
        for doc in docs {
            let mut seen = std::collections::BTreeSet::new();
            for token in &doc.tokens {
                *stats.term_frequency.entry(token.clone()).or_insert(0) += 1;
                stats
                    .positions
                    .entry(token.clone())
                    .or_default()
                    .push(offset);
                offset += 1;
                seen.insert(token.as_str());
            }
            for token in seen {
                *stats.doc_frequency.entry(token.to_string()).or_insert(0) += 1;
            }
        }
        stats.total_tokens = offset;
        stats
    }

    pub fn positions(&self, word: &str) -> &[u64] {
        self.positions.get(word).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Random-walk parameters shared by TextRank, NERank, TopicRank, and the
/// iterative eigenvector/HITS computations.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RandomWalkParams {
    pub damping: f64,
    pub convergence_epsilon: f64,
    pub max_iterations: usize,
}

impl Default for RandomWalkParams {
    fn default() -> Self {
        RandomWalkParams {
            damping: 0.85,
            convergence_epsilon: 1e-4,
            max_iterations: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Base2,
    Base10,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Base2 => x.log2(),
            LogBase::Base10 => x.log10(),
        }
    }
}

/// HITS can run as the standard mutual-reinforcement iteration or as the
/// degree shortcut (hub = in-degree, authority = out-degree).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HitsMode {
    #[default]
    Recursive,
    DegreeShortcut,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ScoreOptions {
    pub walk: RandomWalkParams,
    pub tfidf_log: LogBase,
    pub hits_mode: HitsMode,
}

/// Score every node of the graph under one metric.
pub fn score(
    g: &WcnGraph,
    stats: &CorpusStats,
    metric: Metric,
    options: &ScoreOptions,
) -> Result<ScoreTable> {
    if g.is_empty() {
        return Err(Error::EmptyInput("scoring an empty graph".into()));
    }
    let mut warnings = Vec::new();
    let scores: BTreeMap<String, f64> = match metric {
        Metric::Degree => node_metric(g, |m| m.degree as f64)?,
        Metric::Strength => node_metric(g, |m| m.strength as f64)?,
        Metric::Selectivity => node_metric(g, |m| m.selectivity)?,
        Metric::ClusteringCoefficient => node_metric(g, |m| m.clustering_coefficient)?,
        Metric::Betweenness => betweenness(g),
        Metric::Closeness => closeness(g),
        Metric::Eccentricity => eccentricity(g),
        Metric::Eigenvector => eigenvector(g, &options.walk, &mut warnings),
        Metric::TfIdf => tf_idf(g, stats, options.tfidf_log)?,
        Metric::HitsMax | Metric::HitsAvg => {
            let (hub, auth) = hits(g, options, &mut warnings);
            g.node_ids()
                .map(|id| {
                    let h = hub[&id];
                    let a = auth[&id];
                    let v = if metric == Metric::HitsMax {
                        h.max(a)
                    } else {
                        (h + a) / 2.0
                    };
                    (g.lexicon().word(id).to_string(), v)
                })
                .collect()
        }
        Metric::Textrank => textrank(g, &options.walk, &mut warnings),
        Metric::Nerank => nerank(g, stats, &options.walk, &mut warnings)?,
        Metric::Topicrank => topicrank(g, stats, &options.walk, &mut warnings)?,
    };
    Ok(ScoreTable {
        metric,
        scores,
        warnings,
    })
}

/// Top (or bottom) `n` words by score, ties broken lexicographically.
pub fn top_keywords(table: &ScoreTable, n: usize, bottom: bool) -> Vec<String> {
    let mut ranked: Vec<(&String, f64)> = table.scores.iter().map(|(w, s)| (w, *s)).collect();
    ranked.sort_by(|a, b| {
        let ord = if bottom {
            a.1.partial_cmp(&b.1)
        } else {
            b.1.partial_cmp(&a.1)
        };
        ord.unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(b.0))
    });
    ranked.into_iter().take(n).map(|(w, _)| w.clone()).collect()
}

fn node_metric(
    g: &WcnGraph,
    f: impl Fn(&crate::wcn::NodeMetrics) -> f64,
) -> Result<BTreeMap<String, f64>> {
    g.nodes()
        .map(|w| Ok((w.to_string(), f(&g.node_metrics(w)?))))
        .collect()
}

fn ids_and_index(g: &WcnGraph) -> (Vec<WordId>, BTreeMap<WordId, usize>) {
    let ids: Vec<WordId> = g.node_ids().collect();
    let index = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    (ids, index)
}

/// Brandes betweenness on the directed unweighted graph, normalized by
/// (n-1)(n-2).
fn betweenness(g: &WcnGraph) -> BTreeMap<String, f64> {
    let (ids, index) = ids_and_index(g);
    let n = ids.len();
    let adjacency: Vec<Vec<usize>> = ids
        .iter()
        .map(|id| {
            g.out_neighbors(*id)
                .filter(|(h, _)| *h != *id)
                .map(|(h, _)| index[&h])
                .collect()
        })
        .collect();
    let mut centrality = vec![0.0f64; n];
    for s in 0..n {
        let mut stack = Vec::new();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![i64::MAX; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adjacency[v] {
                if dist[w] == i64::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
    }
    let norm = if n > 2 {
        ((n - 1) * (n - 2)) as f64
    } else {
        1.0
    };
    ids.iter()
        .enumerate()
        .map(|(i, id)| (g.lexicon().word(*id).to_string(), centrality[i] / norm))
        .collect()
}

fn undirected_adjacency(g: &WcnGraph) -> (Vec<WordId>, Vec<Vec<usize>>) {
    let (ids, index) = ids_and_index(g);
    let adjacency = ids
        .iter()
        .map(|id| {
            g.und_neighbors(*id)
                .into_iter()
                .map(|h| index[&h])
                .collect()
        })
        .collect();
    (ids, adjacency)
}

fn bfs_all(adjacency: &[Vec<usize>], src: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adjacency.len()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in &adjacency[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Classic closeness on the undirected view: (reachable-1)/sum of distances,
/// zero for isolated nodes.
fn closeness(g: &WcnGraph) -> BTreeMap<String, f64> {
    let (ids, adjacency) = undirected_adjacency(g);
    ids.iter()
        .enumerate()
        .map(|(i, id)| {
            let dist = bfs_all(&adjacency, i);
            let mut sum = 0u64;
            let mut reach = 0u64;
            for (j, d) in dist.iter().enumerate() {
                if j != i {
                    if let Some(d) = d {
                        sum += u64::from(*d);
                        reach += 1;
                    }
                }
            }
            let value = if reach == 0 || sum == 0 {
                0.0
            } else {
                reach as f64 / sum as f64
            };
            (g.lexicon().word(*id).to_string(), value)
        })
        .collect()
}

/// Reciprocal of the distance to the farthest node in the same component;
/// zero for isolated nodes.
fn eccentricity(g: &WcnGraph) -> BTreeMap<String, f64> {
    let (ids, adjacency) = undirected_adjacency(g);
    ids.iter()
        .enumerate()
        .map(|(i, id)| {
            let max_d = bfs_all(&adjacency, i)
                .into_iter()
                .flatten()
                .max()
                .unwrap_or(0);
            let value = if max_d == 0 { 0.0 } else { 1.0 / f64::from(max_d) };
            (g.lexicon().word(*id).to_string(), value)
        })
        .collect()
}

/// Degree-normalized redistribution on the undirected view, iterated from
/// degree centrality to a fixed point.
fn eigenvector(
    g: &WcnGraph,
    walk: &RandomWalkParams,
    warnings: &mut Vec<String>,
) -> BTreeMap<String, f64> {
    let (ids, adjacency) = undirected_adjacency(g);
    let n = ids.len();
    let degree: Vec<f64> = adjacency.iter().map(|a| a.len() as f64).collect();
    let total: f64 = degree.iter().sum();
    let mut p: Vec<f64> = if total > 0.0 {
        degree.iter().map(|d| d / total).collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    let mut converged = false;
    for _ in 0..walk.max_iterations {
        let mut next = vec![0.0f64; n];
        for (u, neigh) in adjacency.iter().enumerate() {
            for &v in neigh {
                if degree[v] > 0.0 {
                    next[u] += p[v] / degree[v];
                }
            }
        }
        let delta = next
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        p = next;
        if delta < walk.convergence_epsilon {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "eigenvector did not converge within {} iterations",
            walk.max_iterations
        ));
    }
    ids.iter()
        .enumerate()
        .map(|(i, id)| (g.lexicon().word(*id).to_string(), p[i]))
        .collect()
}

/// TF-IDF per word: (count / total tokens) * log(U / U_i).
fn tf_idf(g: &WcnGraph, stats: &CorpusStats, base: LogBase) -> Result<BTreeMap<String, f64>> {
    if stats.doc_count == 0 || stats.total_tokens == 0 {
        return Err(Error::EmptyInput("tf_idf needs corpus stats".into()));
    }
    g.nodes()
        .map(|w| {
            let tf = stats.term_frequency.get(w).copied().unwrap_or(0) as f64
                / stats.total_tokens as f64;
            let df = stats.doc_frequency.get(w).copied().unwrap_or(0);
            let idf = if df == 0 {
                0.0
            } else {
                base.log(stats.doc_count as f64 / df as f64)
            };
            Ok((w.to_string(), tf * idf))
        })
        .collect()
}

/// Standard HITS with L2 normalization per iteration.
fn hits(
    g: &WcnGraph,
    options: &ScoreOptions,
    warnings: &mut Vec<String>,
) -> (BTreeMap<WordId, f64>, BTreeMap<WordId, f64>) {
    let ids: Vec<WordId> = g.node_ids().collect();
    if options.hits_mode == HitsMode::DegreeShortcut {
        let hub = ids.iter().map(|id| (*id, g.in_degree_id(*id) as f64)).collect();
        let auth = ids.iter().map(|id| (*id, g.out_degree_id(*id) as f64)).collect();
        return (hub, auth);
    }
    let (ids, index) = ids_and_index(g);
    let n = ids.len();
    let out_adj: Vec<Vec<usize>> = ids
        .iter()
        .map(|id| g.out_neighbors(*id).map(|(h, _)| index[&h]).collect())
        .collect();
    let mut hub = vec![1.0f64; n];
    let mut auth = vec![1.0f64; n];
    let walk = &options.walk;
    let mut converged = false;
    for _ in 0..walk.max_iterations {
        let mut new_auth = vec![0.0f64; n];
        for (u, neigh) in out_adj.iter().enumerate() {
            for &v in neigh {
                new_auth[v] += hub[u];
            }
        }
        normalize_l2(&mut new_auth);
        let mut new_hub = vec![0.0f64; n];
        for (u, neigh) in out_adj.iter().enumerate() {
            for &v in neigh {
                new_hub[u] += new_auth[v];
            }
        }
        normalize_l2(&mut new_hub);
        let delta = new_hub
            .iter()
            .zip(&hub)
            .chain(new_auth.iter().zip(&auth))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        hub = new_hub;
        auth = new_auth;
        if delta < walk.convergence_epsilon {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "hits did not converge within {} iterations",
            walk.max_iterations
        ));
    }
    let hub_map = ids.iter().enumerate().map(|(i, id)| (*id, hub[i])).collect();
    let auth_map = ids.iter().enumerate().map(|(i, id)| (*id, auth[i])).collect();
    (hub_map, auth_map)
}

fn normalize_l2(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// TextRank: S(i) = (1-d) + d * sum over in-neighbours j of S(j)/outdeg(j).
/// Dangling rank is shared uniformly among the other nodes.
fn textrank(
    g: &WcnGraph,
    walk: &RandomWalkParams,
    warnings: &mut Vec<String>,
) -> BTreeMap<String, f64> {
    let (ids, index) = ids_and_index(g);
    let n = ids.len();
    let in_adj: Vec<Vec<usize>> = ids
        .iter()
        .map(|id| g.in_neighbors(*id).map(|(t, _)| index[&t]).collect())
        .collect();
    let out_deg: Vec<f64> = ids.iter().map(|id| g.out_degree_id(*id) as f64).collect();
    let mut s = vec![1.0f64; n];
    let mut converged = false;
    for _ in 0..walk.max_iterations {
        let dangling: f64 = (0..n).filter(|i| out_deg[*i] == 0.0).map(|i| s[i]).sum();
        let shared = if n > 1 {
            dangling / (n - 1) as f64
        } else {
            0.0
        };
        let mut next = vec![0.0f64; n];
        for i in 0..n {
            let mut acc = 0.0;
            for &j in &in_adj[i] {
                if out_deg[j] > 0.0 {
                    acc += s[j] / out_deg[j];
                }
            }
            if n > 1 {
                acc += shared - if out_deg[i] == 0.0 { s[i] / (n - 1) as f64 } else { 0.0 };
            }
            next[i] = (1.0 - walk.damping) + walk.damping * acc;
        }
        let delta = next
            .iter()
            .zip(&s)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        s = next;
        if delta < walk.convergence_epsilon {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "textrank did not converge within {} iterations",
            walk.max_iterations
        ));
    }
    ids.iter()
        .enumerate()
        .map(|(i, id)| (g.lexicon().word(*id).to_string(), s[i]))
        .collect()
}

/// NERank: node weights are TF-IDF with log base 2, edges carry the WCN
/// weights; dangling rank is shared like in TextRank.
fn nerank(
    g: &WcnGraph,
    stats: &CorpusStats,
    walk: &RandomWalkParams,
    warnings: &mut Vec<String>,
) -> Result<BTreeMap<String, f64>> {
    if stats.doc_count == 0 {
        return Err(Error::EmptyInput("nerank needs corpus stats".into()));
    }
    let (ids, index) = ids_and_index(g);
    let n = ids.len();
    let node_weight: Vec<f64> = ids
        .iter()
        .map(|id| {
            let w = g.lexicon().word(*id);
            let tf = stats.term_frequency.get(w).copied().unwrap_or(0) as f64;
            let df = stats.doc_frequency.get(w).copied().unwrap_or(0);
            if df == 0 {
                0.0
            } else {
                tf * (stats.doc_count as f64 / df as f64).log2()
            }
        })
        .collect();
    let in_adj: Vec<Vec<(usize, f64)>> = ids
        .iter()
        .map(|id| {
            g.in_neighbors(*id)
                .map(|(t, w)| (index[&t], f64::from(w)))
                .collect()
        })
        .collect();
    let out_weight: Vec<f64> = ids
        .iter()
        .map(|id| g.out_strength_id(*id) as f64)
        .collect();
    let mut s = node_weight.clone();
    let mut converged = false;
    for _ in 0..walk.max_iterations {
        let dangling: f64 = (0..n).filter(|i| out_weight[*i] == 0.0).map(|i| s[i]).sum();
        let shared = if n > 1 {
            dangling / (n - 1) as f64
        } else {
            0.0
        };
        let mut next = vec![0.0f64; n];
        for i in 0..n {
            let mut acc = 0.0;
            for &(j, w_ji) in &in_adj[i] {
                if out_weight[j] > 0.0 {
                    acc += w_ji / out_weight[j] * s[j];
                }
            }
            if n > 1 {
                acc += shared - if out_weight[i] == 0.0 { s[i] / (n - 1) as f64 } else { 0.0 };
            }
            next[i] = (1.0 - walk.damping) * node_weight[i]
                + walk.damping * node_weight[i] * acc;
        }
        let delta = next
            .iter()
            .zip(&s)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        s = next;
        if delta < walk.convergence_epsilon {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "nerank did not converge within {} iterations",
            walk.max_iterations
        ));
    }
    Ok(ids
        .iter()
        .enumerate()
        .map(|(i, id)| (g.lexicon().word(*id).to_string(), s[i]))
        .collect())
}

/// Simplified TopicRank: candidates are single words on a complete graph
/// whose edge weights sum reciprocal distances between token offsets in the
/// concatenated corpus.
fn topicrank(
    g: &WcnGraph,
    stats: &CorpusStats,
    walk: &RandomWalkParams,
    warnings: &mut Vec<String>,
) -> Result<BTreeMap<String, f64>> {
    if stats.total_tokens == 0 {
        return Err(Error::EmptyInput("topicrank needs corpus stats".into()));
    }
    let ids: Vec<WordId> = g.node_ids().collect();
    let n = ids.len();
    let mut weights = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let pi = stats.positions(g.lexicon().word(ids[i]));
            let pj = stats.positions(g.lexicon().word(ids[j]));
            let mut w = 0.0;
            for &a in pi {
                for &b in pj {
                    let d = a.abs_diff(b);
                    if d > 0 {
                        w += 1.0 / d as f64;
                    }
                }
            }
            weights[i][j] = w;
            weights[j][i] = w;
        }
    }
    let out_total: Vec<f64> = (0..n).map(|i| weights[i].iter().sum()).collect();
    let mut s = vec![1.0f64; n];
    let mut converged = false;
    for _ in 0..walk.max_iterations {
        let mut next = vec![0.0f64; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                if j != i && out_total[j] > 0.0 {
                    acc += weights[j][i] * s[j] / out_total[j];
                }
            }
            next[i] = (1.0 - walk.damping) + walk.damping * acc;
        }
        let delta = next
            .iter()
            .zip(&s)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        s = next;
        if delta < walk.convergence_epsilon {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "topicrank did not converge within {} iterations",
            walk.max_iterations
        ));
    }
    Ok(ids
        .iter()
        .enumerate()
        .map(|(i, id)| (g.lexicon().word(*id).to_string(), s[i]))
        .collect())
}
