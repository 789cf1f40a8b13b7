//! Keyphrase extraction from decomposed subgraphs.
//!
//! Three extractors share the density measure (sum of edge weights over edge
//! count):
//!
//! - [`mls_extract`]: every simple path from an in-degree-0 element to an
//!   out-degree-0 element, one keyphrase per path.
//! - [`topo_keyphrase`]: one keyphrase per subgraph from a topological sort,
//!   after removing each directed cycle's minimum-weight edge.
//! - [`barank`]: decompose by repeatedly removing the lowest-weight edge
//!   until each piece stops being disassortative, then topologically sort
//!   each terminal piece and rank by density.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::netsci;
use crate::wcn::{ComponentId, WcnGraph, WordId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhraseMethod {
    Mls,
    Topo,
    Barank,
}

/// An ordered word sequence extracted from a subgraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyphrase {
    pub words: Vec<String>,
    pub density: f64,
    pub source_component: ComponentId,
    pub method: PhraseMethod,
}

/// Position of a word within its subgraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementRole {
    First,
    Centre,
    Last,
}

/// First element iff in-degree 0 within the subgraph, last iff out-degree 0,
/// centre otherwise (in-degree 0 wins when both are 0 is impossible for a
/// connected subgraph of >= 2 nodes).
pub fn element_role(s: &WcnGraph, word: &str) -> Result<ElementRole> {
    let id = s
        .lexicon()
        .id(word)
        .filter(|_| s.contains_word(word))
        .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
    Ok(if s.in_degree_id(id) == 0 {
        ElementRole::First
    } else if s.out_degree_id(id) == 0 {
        ElementRole::Last
    } else {
        ElementRole::Centre
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhraseWarning {
    CyclicComponent,
    Truncated { limit: usize },
}

#[derive(Debug)]
pub struct MlsResult {
    pub phrases: Vec<Keyphrase>,
    pub warnings: Vec<PhraseWarning>,
}

/// Enumerate every simple directed path from each in-degree-0 element to
/// each out-degree-0 element, capped at `max_paths`.
pub fn mls_extract(s: &WcnGraph, max_paths: usize) -> Result<MlsResult> {
    if s.node_count() < 2 {
        return Err(Error::Parameter(
            "mls needs a subgraph with at least 2 nodes".into(),
        ));
    }
    let component = ComponentId(0);
    let sources: Vec<WordId> = s.node_ids().filter(|id| s.in_degree_id(*id) == 0).collect();
    let sinks: BTreeSet<WordId> = s.node_ids().filter(|id| s.out_degree_id(*id) == 0).collect();
    if sources.is_empty() || sinks.is_empty() {
        return Ok(MlsResult {
            phrases: Vec::new(),
            warnings: vec![PhraseWarning::CyclicComponent],
        });
    }

    let mut phrases = Vec::new();
    let mut warnings = Vec::new();
    let mut truncated = false;
    'outer: for &start in &sources {
        let mut stack: Vec<WordId> = vec![start];
        let mut on_path: BTreeSet<WordId> = BTreeSet::from([start]);
        // Iterative DFS carrying an iterator index per level.
        let mut cursors: Vec<Vec<WordId>> = vec![s
            .out_neighbors(start)
            .map(|(h, _)| h)
            .collect()];
        let mut position: Vec<usize> = vec![0];
        loop {
            if sinks.contains(stack.last().unwrap()) && stack.len() >= 2 {
                phrases.push(path_phrase(s, &stack, component));
                if phrases.len() >= max_paths {
                    truncated = true;
                    break 'outer;
                }
            }
            // advance deepest cursor
            let depth = stack.len() - 1;
            let mut advanced = false;
            while position[depth] < cursors[depth].len() {
                let next = cursors[depth][position[depth]];
                position[depth] += 1;
                if on_path.contains(&next) {
                    continue;
                }
                stack.push(next);
                on_path.insert(next);
                cursors.push(s.out_neighbors(next).map(|(h, _)| h).collect());
                position.push(0);
                advanced = true;
                break;
            }
            if !advanced {
                let done = stack.pop().unwrap();
                on_path.remove(&done);
                cursors.pop();
                position.pop();
                if stack.is_empty() {
                    break;
                }
            }
        }
    }
    if truncated {
        warnings.push(PhraseWarning::Truncated { limit: max_paths });
    }
    Ok(MlsResult { phrases, warnings })
}

fn path_phrase(s: &WcnGraph, path: &[WordId], component: ComponentId) -> Keyphrase {
    let mut weight_sum = 0u64;
    for pair in path.windows(2) {
        weight_sum += u64::from(s.weight_ids(pair[0], pair[1]).expect("path edge"));
    }
    Keyphrase {
        words: path
            .iter()
            .map(|id| s.lexicon().word(*id).to_string())
            .collect(),
        density: weight_sum as f64 / (path.len() - 1) as f64,
        source_component: component,
        method: PhraseMethod::Mls,
    }
}

/// Remove self-loops, then repeatedly locate a directed cycle (DFS in word
/// order) and delete its minimum-weight edge, ties broken by (tail, head).
pub fn remove_cycles(s: &WcnGraph) -> WcnGraph {
    let mut dag = s.clone();
    let self_loops: Vec<WordId> = dag
        .edge_ids()
        .filter(|(t, h, _)| t == h)
        .map(|(t, _, _)| t)
        .collect();
    for id in self_loops {
        dag.remove_edge(id, id);
    }
    while let Some(cycle) = find_cycle(&dag) {
        let (mut best_t, mut best_h) = cycle[0];
        let mut best_w = dag.weight_ids(best_t, best_h).unwrap();
        for &(t, h) in &cycle[1..] {
            let w = dag.weight_ids(t, h).unwrap();
            let better = w < best_w
                || (w == best_w
                    && (dag.lexicon().word(t), dag.lexicon().word(h))
                        < (dag.lexicon().word(best_t), dag.lexicon().word(best_h)));
            if better {
                best_t = t;
                best_h = h;
                best_w = w;
            }
        }
        dag.remove_edge(best_t, best_h);
    }
    dag
}

/// First directed cycle found by DFS over nodes in lexicographic order,
/// returned as its edge list.
fn find_cycle(g: &WcnGraph) -> Option<Vec<(WordId, WordId)>> {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        New,
        Active,
        Done,
    }
    let ids: Vec<WordId> = g.node_ids().collect();
    let mut state: std::collections::BTreeMap<WordId, State> =
        ids.iter().map(|id| (*id, State::New)).collect();
    for &root in &ids {
        if state[&root] != State::New {
            continue;
        }
        // stack of (node, out-neighbor list, cursor)
        let mut stack: Vec<(WordId, Vec<WordId>, usize)> =
            vec![(root, g.out_neighbors(root).map(|(h, _)| h).collect(), 0)];
        state.insert(root, State::Active);
        while let Some(frame) = stack.last_mut() {
            let (node, neighbors, cursor) = (frame.0, frame.1.clone(), frame.2);
            if cursor < neighbors.len() {
                frame.2 += 1;
                let next = neighbors[cursor];
                match state[&next] {
                    State::New => {
                        state.insert(next, State::Active);
                        stack.push((
                            next,
                            g.out_neighbors(next).map(|(h, _)| h).collect(),
                            0,
                        ));
                    }
                    State::Active => {
                        // Found a back edge node -> next; reconstruct the cycle
                        // from the stack segment starting at `next`.
                        let start = stack
                            .iter()
                            .position(|(id, _, _)| *id == next)
                            .expect("active node on stack");
                        let mut cycle = Vec::new();
                        for pair in stack[start..].windows(2) {
                            cycle.push((pair[0].0, pair[1].0));
                        }
                        cycle.push((node, next));
                        return Some(cycle);
                    }
                    State::Done => {}
                }
            } else {
                state.insert(node, State::Done);
                stack.pop();
            }
        }
    }
    None
}

/// One keyphrase covering all nodes of the subgraph: cycles removed, then a
/// Kahn topological sort with a lexicographically ordered frontier. Density
/// is taken over the surviving edges.
pub fn topo_keyphrase(s: &WcnGraph) -> Result<Keyphrase> {
    topo_keyphrase_tagged(s, ComponentId(0), PhraseMethod::Topo)
}

/// [`topo_keyphrase`] with an explicit component label and method tag.
pub fn topo_keyphrase_tagged(
    s: &WcnGraph,
    component: ComponentId,
    method: PhraseMethod,
) -> Result<Keyphrase> {
    if s.node_count() < 2 {
        return Err(Error::Parameter(
            "topological keyphrase needs at least 2 nodes".into(),
        ));
    }
    let dag = remove_cycles(s);
    let order = topo_order(&dag);
    let density = if dag.edge_count() == 0 {
        0.0
    } else {
        dag.total_weight() as f64 / dag.edge_count() as f64
    };
    Ok(Keyphrase {
        words: order
            .iter()
            .map(|id| dag.lexicon().word(*id).to_string())
            .collect(),
        density,
        source_component: component,
        method,
    })
}

/// Kahn's algorithm with a BTreeSet frontier, so equal-rank nodes emerge in
/// word order. The input must be acyclic.
pub(crate) fn topo_order(dag: &WcnGraph) -> Vec<WordId> {
    let mut in_deg: std::collections::BTreeMap<WordId, usize> = dag
        .node_ids()
        .map(|id| (id, dag.in_degree_id(id) as usize))
        .collect();
    let mut frontier: BTreeSet<WordId> = in_deg
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(id, _)| *id)
        .collect();
    let mut order = Vec::with_capacity(in_deg.len());
    while let Some(&next) = frontier.iter().next() {
        frontier.remove(&next);
        order.push(next);
        for (head, _) in dag.out_neighbors(next) {
            let d = in_deg.get_mut(&head).unwrap();
            *d -= 1;
            if *d == 0 {
                frontier.insert(head);
            }
        }
    }
    debug_assert_eq!(order.len(), in_deg.len(), "input graph had a cycle");
    order
}

/// Result of the assortativity-terminated decomposition: the terminal
/// components and the number of edge removals performed.
#[derive(Debug)]
pub struct BarankDecomposition {
    pub components: Vec<WcnGraph>,
    pub edge_removals: usize,
}

fn is_disassortative(g: &WcnGraph) -> bool {
    matches!(netsci::tau(g), Some(t) if t < 0.0)
}

/// Run the break-even decomposition: while the whole graph is disassortative,
/// repeatedly remove each component's lowest-weight edge — ascending
/// (weight, tail, head) — re-splitting after every removal, until every piece
/// is non-disassortative (tau >= 0 or undefined) or has fewer than 2 edges.
pub fn barank_decompose(g: &WcnGraph) -> BarankDecomposition {
    let mut terminal = Vec::new();
    let mut removals = 0usize;
    if !is_disassortative(g) {
        // Outer guard: a graph that is not disassortative as a whole is
        // harvested without decomposition.
        return BarankDecomposition {
            components: g
                .component_subgraphs()
                .into_iter()
                .filter(|c| c.node_count() >= 2)
                .collect(),
            edge_removals: 0,
        };
    }
    let mut queue: Vec<WcnGraph> = g.component_subgraphs();
    while let Some(comp) = queue.pop() {
        if comp.node_count() < 2 {
            continue;
        }
        if comp.edge_count() < 2 || !is_disassortative(&comp) {
            terminal.push(comp);
            continue;
        }
        let mut comp = comp;
        let (t, h, _) = comp
            .edge_ids()
            .map(|(t, h, w)| (w, t, h))
            .min()
            .map(|(w, t, h)| (t, h, w))
            .expect("component has edges");
        comp.remove_edge(t, h);
        removals += 1;
        comp.drop_isolated_nodes();
        queue.extend(comp.component_subgraphs());
    }
    // Deterministic output order: by smallest member word.
    terminal.sort_by(|a, b| {
        a.nodes()
            .next()
            .unwrap_or_default()
            .cmp(b.nodes().next().unwrap_or_default())
    });
    BarankDecomposition {
        components: terminal,
        edge_removals: removals,
    }
}

/// BArank: decompose to the assortativity break-even point, topologically
/// sort each terminal component, rank by density descending (ties by word
/// sequence), and return the top `top_n` phrases.
pub fn barank(g: &WcnGraph, top_n: usize) -> Result<Vec<Keyphrase>> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyInput("barank needs at least one edge".into()));
    }
    let decomposition = barank_decompose(g);
    let labels = g.components();
    let mut phrases = Vec::new();
    for comp in &decomposition.components {
        if comp.node_count() < 2 {
            continue;
        }
        let component = comp
            .nodes()
            .next()
            .and_then(|w| labels.get(w).copied())
            .unwrap_or(ComponentId(0));
        phrases.push(topo_keyphrase_tagged(comp, component, PhraseMethod::Barank)?);
    }
    sort_by_density(&mut phrases);
    phrases.truncate(top_n);
    Ok(phrases)
}

/// Density descending, ties by lexicographic word sequence.
pub fn sort_by_density(phrases: &mut [Keyphrase]) {
    phrases.sort_by(|a, b| {
        b.density
            .partial_cmp(&a.density)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.words.cmp(&b.words))
    });
}
