//! Reduce a WCN to high-weight subgraphs: heuristic edge retention, the
//! iterative k-bridge decomposition, and its threshold-based approximation.
//!
//! All three are monotone (edges and weights never grow) and deterministic:
//! edge ordering is always by the (weight, tail, head) key.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::wcn::{WcnGraph, WordId};
use crate::{Error, Result};

/// Edge-retention heuristics: how many of the heaviest edges survive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicKind {
    /// `k = floor(sqrt(|E|))`
    RootTwo,
    /// `k = floor(|E| / 2)`
    DividedByTwo,
    /// `k = floor(|E| / 3)`
    DividedByThree,
    /// `k = ceil(ln |E|)`
    LogMethod,
}

impl HeuristicKind {
    pub fn edges_to_keep(self, edge_count: usize) -> usize {
        let e = edge_count as f64;
        match self {
            HeuristicKind::RootTwo => e.sqrt().floor() as usize,
            HeuristicKind::DividedByTwo => edge_count / 2,
            HeuristicKind::DividedByThree => edge_count / 3,
            HeuristicKind::LogMethod => (e.ln() - 1e-12).ceil().max(0.0) as usize,
        }
    }
}

/// Parameters of a decomposition run, echoed into reports.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Provenance {
    Heuristic { heuristic: HeuristicKind, kept: usize },
    KBridge { n_t: usize, iterations: usize },
    Threshold { p: usize, iterations: usize },
}

/// Node-disjoint weakly connected subgraphs, each with at least 2 nodes.
#[derive(Debug)]
pub struct SubgraphSet {
    pub subgraphs: Vec<WcnGraph>,
    pub provenance: Provenance,
}

impl SubgraphSet {
    pub fn total_edges(&self) -> usize {
        self.subgraphs.iter().map(|g| g.edge_count()).sum()
    }
}

/// Components of `g` with at least 2 nodes, single-node pieces removed.
fn multi_node_components(g: &WcnGraph) -> Vec<WcnGraph> {
    g.component_subgraphs()
        .into_iter()
        .filter(|c| c.node_count() >= 2)
        .collect()
}

/// Edges sorted ascending by (weight, tail, head); descending retention takes
/// this order reversed.
fn edges_ascending(g: &WcnGraph) -> Vec<(WordId, WordId, u32)> {
    let mut edges: Vec<(u32, WordId, WordId)> =
        g.edge_ids().map(|(t, h, w)| (w, t, h)).collect();
    edges.sort_unstable();
    edges.into_iter().map(|(w, t, h)| (t, h, w)).collect()
}

/// Keep the top-k edges by descending (weight, tail, head), drop the rest and
/// any node left isolated, and return the surviving components.
pub fn heuristic_retain(g: &WcnGraph, heuristic: HeuristicKind) -> Result<SubgraphSet> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyInput("heuristic retention needs edges".into()));
    }
    let k = heuristic.edges_to_keep(g.edge_count());
    if k == 0 {
        return Err(Error::Parameter(format!(
            "{heuristic:?} keeps 0 of {} edges",
            g.edge_count()
        )));
    }
    let mut pruned = g.clone();
    let ascending = edges_ascending(&pruned);
    let drop_count = ascending.len().saturating_sub(k);
    for (t, h, _) in ascending.into_iter().take(drop_count) {
        pruned.remove_edge(t, h);
    }
    pruned.drop_isolated_nodes();
    Ok(SubgraphSet {
        subgraphs: multi_node_components(&pruned),
        provenance: Provenance::Heuristic { heuristic, kept: k },
    })
}

/// Iteratively decrement every edge weight by 1 in each component with at
/// least `n_t` nodes, pruning zero-weight edges and zero-degree nodes, until
/// every component is smaller than `n_t`. Surviving components keep their
/// reduced weights.
pub fn k_bridge(g: &WcnGraph, n_t: usize) -> Result<SubgraphSet> {
    if n_t < 2 {
        return Err(Error::Parameter(format!("n_t must be >= 2, got {n_t}")));
    }
    let mut work = g.clone();
    let mut iterations = 0usize;
    loop {
        let oversized: Vec<BTreeSet<WordId>> = work
            .component_members()
            .into_iter()
            .filter(|c| c.len() >= n_t)
            .collect();
        if oversized.is_empty() {
            break;
        }
        iterations += 1;
        for members in oversized {
            let edges: Vec<(WordId, WordId, u32)> = work
                .edge_ids()
                .filter(|(t, h, _)| members.contains(t) && members.contains(h))
                .collect();
            for (t, h, w) in edges {
                if w <= 1 {
                    work.remove_edge(t, h);
                } else {
                    work.set_weight(t, h, w - 1);
                }
            }
        }
        work.drop_isolated_nodes();
    }
    Ok(SubgraphSet {
        subgraphs: multi_node_components(&work),
        provenance: Provenance::KBridge { n_t, iterations },
    })
}

/// Threshold-based approximation: per iteration each component derives
/// `t` = its p-th largest edge weight (its smallest when it has fewer than
/// `p` edges), removes edges with weight <= t, reduces the rest by t, and
/// drops isolated nodes; stops at the fixed point where no edge is removed.
pub fn threshold_decompose(g: &WcnGraph, p: usize) -> Result<SubgraphSet> {
    if p < 1 {
        return Err(Error::Parameter("p must be >= 1".into()));
    }
    let mut work = g.clone();
    let mut iterations = 0usize;
    loop {
        let mut removed_any = false;
        for members in work.component_members() {
            let mut weights: Vec<u32> = work
                .edge_ids()
                .filter(|(t, h, _)| members.contains(t) && members.contains(h))
                .map(|(_, _, w)| w)
                .collect();
            if weights.is_empty() {
                continue;
            }
            weights.sort_unstable_by(|a, b| b.cmp(a));
            let t = if weights.len() >= p {
                weights[p - 1]
            } else {
                *weights.last().unwrap()
            };
            let edges: Vec<(WordId, WordId, u32)> = work
                .edge_ids()
                .filter(|(tl, h, _)| members.contains(tl) && members.contains(h))
                .collect();
            for (tail, head, w) in edges {
                if w <= t {
                    work.remove_edge(tail, head);
                    removed_any = true;
                } else {
                    work.set_weight(tail, head, w - t);
                }
            }
        }
        work.drop_isolated_nodes();
        if !removed_any {
            break;
        }
        iterations += 1;
    }
    Ok(SubgraphSet {
        subgraphs: multi_node_components(&work),
        provenance: Provenance::Threshold { p, iterations },
    })
}
