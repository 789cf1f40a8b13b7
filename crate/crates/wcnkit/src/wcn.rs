//! The directed, weighted word co-occurrence network.
//!
//! Words are interned to integer ids assigned in lexicographic order, so
//! iterating nodes by id is iterating words alphabetically and edge iteration
//! by (tail, head) id pairs is deterministic. Subgraphs produced by
//! decomposition share the parent's lexicon.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenStream;
use crate::{Error, Result};

pub type WordId = u32;

/// Immutable word table shared by a graph and all of its subgraphs.
#[derive(Debug)]
pub struct Lexicon {
    words: Vec<String>,
    index: HashMap<String, WordId>,
}

impl Lexicon {
    fn from_words(set: BTreeSet<String>) -> Self {
        let words: Vec<String> = set.into_iter().collect();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as WordId))
            .collect();
        Lexicon { words, index }
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id as usize]
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }
}

/// Edging scheme: link consecutive tokens only, or every ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Edging {
    #[default]
    NearestNeighbour,
    AllPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Directed,
    Undirected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Weighted,
    Unweighted,
}

/// Construction mode. The default is nearest-neighbour, directed, weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct WcnMode {
    pub edging: Edging,
    pub direction: Direction,
    pub weighting: Weighting,
}

/// Per-node metrics: degree, strength, selectivity, clustering coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeMetrics {
    pub degree: u64,
    pub in_degree: u64,
    pub out_degree: u64,
    pub strength: u64,
    pub in_strength: u64,
    pub out_strength: u64,
    pub selectivity: f64,
    pub clustering_coefficient: f64,
}

/// Label of a weakly connected component, assigned in order of the smallest
/// lexicographic member word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentId(pub usize);

#[derive(Debug, Clone)]
pub struct WcnGraph {
    lexicon: Arc<Lexicon>,
    mode: WcnMode,
    nodes: BTreeSet<WordId>,
    out: BTreeMap<WordId, BTreeMap<WordId, u32>>,
    inc: BTreeMap<WordId, BTreeMap<WordId, u32>>,
    edge_count: usize,
    total_weight: u64,
}

/// Build a WCN from token streams. Nearest-neighbour mode links consecutive
/// token pairs, all-pair mode links every ordered pair within a document;
/// weighted mode counts repeated co-occurrences. Every token becomes a node,
/// including words from single-token documents.
pub fn build_wcn(docs: &[TokenStream], mode: WcnMode) -> WcnGraph {
    let mut vocab: BTreeSet<String> = BTreeSet::new();
    for doc in docs {
        for token in &doc.tokens {
            if !vocab.contains(token) {
                vocab.insert(token.clone());
            }
        }
    }
    let lexicon = Arc::new(Lexicon::from_words(vocab));

    let mut graph = WcnGraph {
        nodes: (0..lexicon.words.len() as WordId).collect(),
        lexicon,
        mode,
        out: BTreeMap::new(),
        inc: BTreeMap::new(),
        edge_count: 0,
        total_weight: 0,
    };

    for doc in docs {
        let ids: Vec<WordId> = doc
            .tokens
            .iter()
            .map(|t| graph.lexicon.id(t).expect("token interned"))
            .collect();
        match mode.edging {
            Edging::NearestNeighbour => {
                for pair in ids.windows(2) {
                    graph.bump(pair[0], pair[1]);
                }
            }
            Edging::AllPair => {
                for i in 0..ids.len() {
                    for j in i + 1..ids.len() {
                        // A repeated word only self-loops when adjacent.
                        if ids[i] == ids[j] && j != i + 1 {
                            continue;
                        }
                        graph.bump(ids[i], ids[j]);
                    }
                }
            }
        }
    }
    graph
}

impl WcnGraph {
    /// Build a graph directly from weighted edges; intended for tests and
    /// programmatic fixtures.
    pub fn from_weighted_edges(edges: &[(&str, &str, u32)]) -> WcnGraph {
        let mut vocab = BTreeSet::new();
        for (t, h, _) in edges {
            vocab.insert(t.to_string());
            vocab.insert(h.to_string());
        }
        let lexicon = Arc::new(Lexicon::from_words(vocab));
        let mut graph = WcnGraph {
            nodes: (0..lexicon.words.len() as WordId).collect(),
            lexicon,
            mode: WcnMode::default(),
            out: BTreeMap::new(),
            inc: BTreeMap::new(),
            edge_count: 0,
            total_weight: 0,
        };
        for (t, h, w) in edges {
            let ti = graph.lexicon.id(t).unwrap();
            let hi = graph.lexicon.id(h).unwrap();
            graph.add_weight(ti, hi, *w);
        }
        graph
    }

    fn bump(&mut self, tail: WordId, head: WordId) {
        let (tail, head) = match self.mode.direction {
            Direction::Directed => (tail, head),
            Direction::Undirected => (tail.min(head), tail.max(head)),
        };
        match self.mode.weighting {
            Weighting::Weighted => self.add_weight(tail, head, 1),
            Weighting::Unweighted => {
                if self.weight_ids(tail, head).is_none() {
                    self.add_weight(tail, head, 1);
                }
            }
        }
    }

    pub(crate) fn add_weight(&mut self, tail: WordId, head: WordId, w: u32) {
        debug_assert!(w >= 1);
        self.nodes.insert(tail);
        self.nodes.insert(head);
        let slot = self.out.entry(tail).or_default().entry(head).or_insert(0);
        if *slot == 0 {
            self.edge_count += 1;
        }
        *slot += w;
        *self.inc.entry(head).or_default().entry(tail).or_insert(0) += w;
        self.total_weight += u64::from(w);
    }

    /// Remove an edge entirely; returns its weight if it existed.
    pub(crate) fn remove_edge(&mut self, tail: WordId, head: WordId) -> Option<u32> {
        let w = self.out.get_mut(&tail)?.remove(&head)?;
        if let Some(m) = self.inc.get_mut(&head) {
            m.remove(&tail);
        }
        self.edge_count -= 1;
        self.total_weight -= u64::from(w);
        Some(w)
    }

    /// Set an edge to a new positive weight (used by weight-reducing
    /// decompositions).
    pub(crate) fn set_weight(&mut self, tail: WordId, head: WordId, w: u32) {
        debug_assert!(w >= 1);
        if let Some(slot) = self.out.get_mut(&tail).and_then(|m| m.get_mut(&head)) {
            self.total_weight -= u64::from(*slot);
            *slot = w;
            self.total_weight += u64::from(w);
            self.inc.get_mut(&head).unwrap().insert(tail, w);
        }
    }

    /// Drop nodes that no longer touch any edge.
    pub(crate) fn drop_isolated_nodes(&mut self) {
        let keep: BTreeSet<WordId> = self
            .out
            .iter()
            .filter(|(_, m)| !m.is_empty())
            .map(|(id, _)| *id)
            .chain(
                self.inc
                    .iter()
                    .filter(|(_, m)| !m.is_empty())
                    .map(|(id, _)| *id),
            )
            .collect();
        self.nodes = keep;
        self.out.retain(|_, m| !m.is_empty());
        self.inc.retain(|_, m| !m.is_empty());
    }

    pub fn lexicon(&self) -> &Arc<Lexicon> {
        &self.lexicon
    }

    pub fn mode(&self) -> WcnMode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Words in lexicographic order.
    pub fn nodes(&self) -> impl Iterator<Item = &str> + '_ {
        self.nodes.iter().map(|id| self.lexicon.word(*id))
    }

    pub(crate) fn node_ids(&self) -> impl Iterator<Item = WordId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.lexicon
            .id(word)
            .map(|id| self.nodes.contains(&id))
            .unwrap_or(false)
    }

    /// Edges sorted by (tail, head) word order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u32)> + '_ {
        self.out.iter().flat_map(move |(tail, heads)| {
            heads
                .iter()
                .map(move |(head, w)| (self.lexicon.word(*tail), self.lexicon.word(*head), *w))
        })
    }

    pub(crate) fn edge_ids(&self) -> impl Iterator<Item = (WordId, WordId, u32)> + '_ {
        self.out.iter().flat_map(|(tail, heads)| {
            heads.iter().map(move |(head, w)| (*tail, *head, *w))
        })
    }

    pub fn weight(&self, tail: &str, head: &str) -> Option<u32> {
        let t = self.lexicon.id(tail)?;
        let h = self.lexicon.id(head)?;
        self.weight_ids(t, h)
    }

    pub(crate) fn weight_ids(&self, tail: WordId, head: WordId) -> Option<u32> {
        self.out.get(&tail).and_then(|m| m.get(&head)).copied()
    }

    pub(crate) fn out_neighbors(&self, id: WordId) -> impl Iterator<Item = (WordId, u32)> + '_ {
        self.out
            .get(&id)
            .into_iter()
            .flat_map(|m| m.iter().map(|(h, w)| (*h, *w)))
    }

    pub(crate) fn in_neighbors(&self, id: WordId) -> impl Iterator<Item = (WordId, u32)> + '_ {
        self.inc
            .get(&id)
            .into_iter()
            .flat_map(|m| m.iter().map(|(t, w)| (*t, *w)))
    }

    pub(crate) fn in_degree_id(&self, id: WordId) -> u64 {
        self.inc.get(&id).map(|m| m.len() as u64).unwrap_or(0)
    }

    pub(crate) fn out_degree_id(&self, id: WordId) -> u64 {
        self.out.get(&id).map(|m| m.len() as u64).unwrap_or(0)
    }

    pub(crate) fn in_strength_id(&self, id: WordId) -> u64 {
        self.inc
            .get(&id)
            .map(|m| m.values().map(|w| u64::from(*w)).sum())
            .unwrap_or(0)
    }

    pub(crate) fn out_strength_id(&self, id: WordId) -> u64 {
        self.out
            .get(&id)
            .map(|m| m.values().map(|w| u64::from(*w)).sum())
            .unwrap_or(0)
    }

    pub(crate) fn degree_id(&self, id: WordId) -> u64 {
        self.in_degree_id(id) + self.out_degree_id(id)
    }

    pub(crate) fn strength_id(&self, id: WordId) -> u64 {
        self.in_strength_id(id) + self.out_strength_id(id)
    }

    /// Neighbors in the undirected simple view (direction collapsed,
    /// self-loops dropped).
    pub(crate) fn und_neighbors(&self, id: WordId) -> BTreeSet<WordId> {
        let mut set: BTreeSet<WordId> = BTreeSet::new();
        if let Some(m) = self.out.get(&id) {
            set.extend(m.keys().copied());
        }
        if let Some(m) = self.inc.get(&id) {
            set.extend(m.keys().copied());
        }
        set.remove(&id);
        set
    }

    /// Degree, strength, selectivity, and clustering coefficient of a word.
    pub fn node_metrics(&self, word: &str) -> Result<NodeMetrics> {
        let id = self
            .lexicon
            .id(word)
            .filter(|id| self.nodes.contains(id))
            .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
        let in_degree = self.in_degree_id(id);
        let out_degree = self.out_degree_id(id);
        let degree = in_degree + out_degree;
        let in_strength = self.in_strength_id(id);
        let out_strength = self.out_strength_id(id);
        let strength = in_strength + out_strength;
        let selectivity = if degree > 0 {
            strength as f64 / degree as f64
        } else {
            0.0
        };
        Ok(NodeMetrics {
            degree,
            in_degree,
            out_degree,
            strength,
            in_strength,
            out_strength,
            selectivity,
            clustering_coefficient: self.clustering_coefficient_id(id),
        })
    }

    /// Fraction of linked neighbour pairs in the undirected simple view.
    pub(crate) fn clustering_coefficient_id(&self, id: WordId) -> f64 {
        let neigh = self.und_neighbors(id);
        let k = neigh.len();
        if k < 2 {
            return 0.0;
        }
        let mut linked = 0u64;
        let neigh: Vec<WordId> = neigh.into_iter().collect();
        for i in 0..neigh.len() {
            for j in i + 1..neigh.len() {
                let (u, v) = (neigh[i], neigh[j]);
                if self.weight_ids(u, v).is_some() || self.weight_ids(v, u).is_some() {
                    linked += 1;
                }
            }
        }
        2.0 * linked as f64 / (k as f64 * (k as f64 - 1.0))
    }

    /// Normalized co-occurrence affinity of an edge:
    /// `2*w(u,v) / (strength(u) + strength(v) - w(u,v))`.
    pub fn edge_strength(&self, tail: &str, head: &str) -> Result<f64> {
        let t = self.lexicon.id(tail);
        let h = self.lexicon.id(head);
        let (t, h, w) = match (t, h) {
            (Some(t), Some(h)) => match self.weight_ids(t, h) {
                Some(w) => (t, h, w),
                None => {
                    return Err(Error::MissingEdge {
                        tail: tail.to_string(),
                        head: head.to_string(),
                    })
                }
            },
            _ => {
                return Err(Error::MissingEdge {
                    tail: tail.to_string(),
                    head: head.to_string(),
                })
            }
        };
        let denom = (self.strength_id(t) + self.strength_id(h)) as f64 - f64::from(w);
        Ok(2.0 * f64::from(w) / denom)
    }

    /// Weakly connected component label per word, labels assigned in order of
    /// the smallest lexicographic member.
    pub fn components(&self) -> BTreeMap<String, ComponentId> {
        let mut labels = BTreeMap::new();
        for (cid, members) in self.component_members().into_iter().enumerate() {
            for id in members {
                labels.insert(self.lexicon.word(id).to_string(), ComponentId(cid));
            }
        }
        labels
    }

    /// Members of each weakly connected component, ordered by smallest member
    /// id (= lexicographically smallest word).
    pub(crate) fn component_members(&self) -> Vec<BTreeSet<WordId>> {
        let mut seen: BTreeSet<WordId> = BTreeSet::new();
        let mut components = Vec::new();
        for &start in &self.nodes {
            if seen.contains(&start) {
                continue;
            }
            let mut members = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            seen.insert(start);
            while let Some(id) = queue.pop_front() {
                members.insert(id);
                let mut next: BTreeSet<WordId> = self.und_neighbors(id);
                if self.weight_ids(id, id).is_some() {
                    next.insert(id);
                }
                for n in next {
                    if seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
            components.push(members);
        }
        components
    }

    /// Each weakly connected component as its own subgraph (lexicon shared).
    pub fn component_subgraphs(&self) -> Vec<WcnGraph> {
        self.component_members()
            .into_iter()
            .map(|members| self.induced(&members))
            .collect()
    }

    /// Subgraph induced by a node set.
    pub(crate) fn induced(&self, members: &BTreeSet<WordId>) -> WcnGraph {
        let mut sub = WcnGraph {
            lexicon: Arc::clone(&self.lexicon),
            mode: self.mode,
            nodes: members.clone(),
            out: BTreeMap::new(),
            inc: BTreeMap::new(),
            edge_count: 0,
            total_weight: 0,
        };
        for &id in members {
            for (head, w) in self.out_neighbors(id) {
                if members.contains(&head) {
                    sub.add_weight(id, head, w);
                }
            }
        }
        sub.nodes = members.clone();
        sub
    }

    /// Write the edge list as `tail<TAB>head<TAB>weight`, sorted by
    /// (tail, head).
    pub fn dump_edge_list(&self, mut out: impl Write) -> std::io::Result<()> {
        for (tail, head, w) in self.edges() {
            writeln!(out, "{tail}\t{head}\t{w}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TokenStream;

    pub(crate) fn stream(id: &str, tokens: &[&str]) -> TokenStream {
        TokenStream {
            doc_id: id.to_string(),
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    #[test]
    fn nearest_neighbour_links_consecutive_pairs() {
        let g = build_wcn(&[stream("1", &["a", "b", "c"])], WcnMode::default());
        assert_eq!(g.weight("a", "b"), Some(1));
        assert_eq!(g.weight("b", "c"), Some(1));
        assert_eq!(g.weight("a", "c"), None);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn all_pair_links_every_ordered_pair() {
        let mode = WcnMode {
            edging: Edging::AllPair,
            ..WcnMode::default()
        };
        let g = build_wcn(&[stream("1", &["a", "b", "c"])], mode);
        assert_eq!(g.weight("a", "b"), Some(1));
        assert_eq!(g.weight("a", "c"), Some(1));
        assert_eq!(g.weight("b", "c"), Some(1));
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn repeated_cooccurrence_accumulates_weight() {
        let docs = vec![
            stream("1", &["amy", "winehouse", "died"]),
            stream("2", &["amy", "winehouse", "died"]),
            stream("3", &["amy", "winehouse", "died"]),
        ];
        let g = build_wcn(&docs, WcnMode::default());
        assert_eq!(g.weight("amy", "winehouse"), Some(3));
        assert_eq!(g.weight("winehouse", "died"), Some(3));
    }

    #[test]
    fn single_token_documents_create_isolated_nodes() {
        let g = build_wcn(&[stream("1", &["solo"])], WcnMode::default());
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        let m = g.node_metrics("solo").unwrap();
        assert_eq!(m.degree, 0);
        assert_eq!(m.selectivity, 0.0);
    }

    #[test]
    fn path_midpoint_metrics() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 1), ("b", "c", 1)]);
        let m = g.node_metrics("b").unwrap();
        assert_eq!(m.degree, 2);
        assert_eq!(m.in_degree, 1);
        assert_eq!(m.out_degree, 1);
        assert_eq!(m.strength, 2);
        assert_eq!(m.selectivity, 1.0);
        assert_eq!(m.clustering_coefficient, 0.0);
    }

    #[test]
    fn triangle_has_full_clustering() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 1), ("b", "c", 1), ("c", "a", 1)]);
        for w in ["a", "b", "c"] {
            assert_eq!(g.node_metrics(w).unwrap().clustering_coefficient, 1.0);
        }
    }

    #[test]
    fn selectivity_of_weighted_hub() {
        let g = WcnGraph::from_weighted_edges(&[("a", "x", 3), ("b", "x", 2), ("x", "c", 1)]);
        let m = g.node_metrics("x").unwrap();
        assert_eq!(m.strength, 6);
        assert_eq!(m.degree, 3);
        assert_eq!(m.selectivity, 2.0);
    }

    #[test]
    fn unknown_word_is_an_error() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 1)]);
        assert!(matches!(
            g.node_metrics("zzz"),
            Err(Error::UnknownWord(_))
        ));
    }

    #[test]
    fn edge_strength_examples() {
        // strengths 5 and 4 sharing an edge of weight 3 -> 2*3/(5+4-3) = 1.0
        let g = WcnGraph::from_weighted_edges(&[("u", "v", 3), ("x", "u", 2), ("v", "y", 1)]);
        assert_eq!(g.node_metrics("u").unwrap().strength, 5);
        assert_eq!(g.node_metrics("v").unwrap().strength, 4);
        assert!((g.edge_strength("u", "v").unwrap() - 1.0).abs() < 1e-12);

        let pair = WcnGraph::from_weighted_edges(&[("u", "v", 1)]);
        assert!((pair.edge_strength("u", "v").unwrap() - 2.0).abs() < 1e-12);

        let g = WcnGraph::from_weighted_edges(&[
            ("u", "v", 2),
            ("a", "u", 8),
            ("v", "b", 8),
        ]);
        assert!((g.edge_strength("u", "v").unwrap() - 4.0 / 18.0).abs() < 1e-12);
        assert!(g.edge_strength("u", "zzz").is_err());
    }

    #[test]
    fn component_labels_follow_lexicographic_order() {
        let g = WcnGraph::from_weighted_edges(&[("c", "d", 1), ("a", "b", 1)]);
        let labels = g.components();
        assert_eq!(labels["a"], ComponentId(0));
        assert_eq!(labels["b"], ComponentId(0));
        assert_eq!(labels["c"], ComponentId(1));
        assert_eq!(labels["d"], ComponentId(1));

        let chain = WcnGraph::from_weighted_edges(&[("a", "b", 1), ("b", "c", 1)]);
        let labels = chain.components();
        assert!(labels.values().all(|c| *c == ComponentId(0)));

        let empty = build_wcn(&[], WcnMode::default());
        assert!(empty.components().is_empty());
    }

    #[test]
    fn degree_and_strength_sums_match_edges() {
        let g = WcnGraph::from_weighted_edges(&[
            ("a", "b", 2),
            ("b", "c", 3),
            ("c", "a", 1),
            ("c", "d", 5),
        ]);
        let in_sum: u64 = g.nodes().map(|w| g.node_metrics(w).unwrap().in_degree).sum();
        let out_sum: u64 = g.nodes().map(|w| g.node_metrics(w).unwrap().out_degree).sum();
        assert_eq!(in_sum, g.edge_count() as u64);
        assert_eq!(out_sum, g.edge_count() as u64);
        let strength_sum: u64 = g.nodes().map(|w| g.node_metrics(w).unwrap().strength).sum();
        assert_eq!(strength_sum, 2 * g.total_weight());
    }

    #[test]
    fn rebuild_is_deterministic() {
        let docs = vec![
            stream("1", &["b", "a", "c", "a"]),
            stream("2", &["c", "b", "a"]),
        ];
        let g1 = build_wcn(&docs, WcnMode::default());
        let g2 = build_wcn(&docs, WcnMode::default());
        let e1: Vec<_> = g1.edges().collect();
        let e2: Vec<_> = g2.edges().collect();
        assert_eq!(e1, e2);
        let mut d1 = Vec::new();
        let mut d2 = Vec::new();
        g1.dump_edge_list(&mut d1).unwrap();
        g2.dump_edge_list(&mut d2).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn undirected_unweighted_modes() {
        let mode = WcnMode {
            direction: Direction::Undirected,
            weighting: Weighting::Unweighted,
            ..WcnMode::default()
        };
        let g = build_wcn(
            &[stream("1", &["b", "a"]), stream("2", &["a", "b"])],
            mode,
        );
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight("a", "b"), Some(1));
    }

    #[test]
    fn self_loop_from_adjacent_repeat() {
        let g = build_wcn(&[stream("1", &["a", "a", "b"])], WcnMode::default());
        assert_eq!(g.weight("a", "a"), Some(1));
        let m = g.node_metrics("a").unwrap();
        assert_eq!(m.degree, 3);
        assert_eq!(m.strength, 3);
    }
}
