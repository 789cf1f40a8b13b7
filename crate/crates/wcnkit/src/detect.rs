//! Event detection: the TWCM batch model and the sliding-window pipeline
//! (preprocess -> WCN -> qualification -> break-even decomposition ->
//! topological phrases -> AHP ranking).

use serde::{Deserialize, Serialize};

use crate::ahp::{self, Pcm, SlotThresholds};
use crate::corpus::{self, RawDocument, StopwordPolicy, TokenStream};
use crate::phrase::{self, Keyphrase, PhraseMethod};
use crate::wcn::{build_wcn, ComponentId, WcnGraph, WcnMode};
use crate::Result;

/// Sliding-window detector parameters.
///
/// `min_component_nodes` (`M_q`) is always derived as `ceil(m * M_G)`: a
/// component qualifies for decomposition when it has at least that many
/// nodes, and a terminal piece yields an event phrase only when it has more
/// than `min_event_nodes` (`M_G`) nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Documents per window (defaults to 200).
    pub window_size: usize,
    /// Multiplicative qualification factor `m` (defaults to 2).
    pub multiplier: f64,
    /// Minimum node count for event-phrase extraction (`M_G`).
    pub min_event_nodes: usize,
    /// Domain-stopword fraction per window (`t_s`, defaults to 0.01).
    pub domain_fraction: f64,
    /// Events emitted per window.
    pub top_n: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            window_size: 200,
            multiplier: 2.0,
            min_event_nodes: 2,
            domain_fraction: 0.01,
            top_n: 5,
        }
    }
}

impl DetectorConfig {
    /// Qualification threshold `M_q = ceil(m * M_G)`.
    pub fn qualification_nodes(&self) -> usize {
        (self.multiplier * self.min_event_nodes as f64 - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_size < 1 {
            return Err(crate::Error::Parameter("window size must be >= 1".into()));
        }
        if !self.multiplier.is_finite() || self.multiplier <= 0.0 {
            return Err(crate::Error::Parameter("m must be > 0".into()));
        }
        if self.min_event_nodes < 1 {
            return Err(crate::Error::Parameter("M_G must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.domain_fraction) {
            return Err(crate::Error::Parameter("t_s must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// One detected event phrase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventPhrase {
    pub window: usize,
    pub rank: usize,
    pub score: f64,
    pub words: Vec<String>,
}

/// TWCM: keep the `floor(sqrt(|E|))` heaviest edges (minimum 1) of the
/// nearest-neighbour WCN, then emit one topological-sort phrase per
/// surviving component, in component order.
pub fn twcm(docs: &[TokenStream]) -> Result<Vec<Keyphrase>> {
    let g = build_wcn(docs, WcnMode::default());
    if g.edge_count() == 0 {
        return Ok(Vec::new());
    }
    let k = ((g.edge_count() as f64).sqrt().floor() as usize).max(1);
    let mut pruned = g.clone();
    let mut ascending: Vec<(u32, String, String)> = pruned
        .edges()
        .map(|(t, h, w)| (w, t.to_string(), h.to_string()))
        .collect();
    ascending.sort();
    let drop_count = ascending.len().saturating_sub(k);
    for (_, t, h) in ascending.into_iter().take(drop_count) {
        let ti = pruned.lexicon().id(&t).unwrap();
        let hi = pruned.lexicon().id(&h).unwrap();
        pruned.remove_edge(ti, hi);
    }
    pruned.drop_isolated_nodes();

    let mut phrases = Vec::new();
    for (idx, comp) in pruned.component_subgraphs().into_iter().enumerate() {
        if comp.node_count() < 2 {
            continue;
        }
        phrases.push(phrase::topo_keyphrase_tagged(
            &comp,
            ComponentId(idx),
            PhraseMethod::Topo,
        )?);
    }
    Ok(phrases)
}

/// Events extracted from one qualified component: decompose to the
/// assortativity break-even point, then topologically sort every terminal
/// piece with more than `min_event_nodes` nodes.
pub fn obtain_events(component: &WcnGraph, min_event_nodes: usize) -> Result<Vec<Keyphrase>> {
    let decomposition = phrase::barank_decompose(component);
    let mut phrases = Vec::new();
    for (idx, piece) in decomposition.components.iter().enumerate() {
        if piece.node_count() > min_event_nodes {
            phrases.push(phrase::topo_keyphrase_tagged(
                piece,
                ComponentId(idx),
                PhraseMethod::Barank,
            )?);
        }
    }
    Ok(phrases)
}

/// Keyphrases of one window together with the subgraphs they came from.
struct WindowPhrases {
    phrases: Vec<Keyphrase>,
    subgraphs: Vec<WcnGraph>,
    graph: WcnGraph,
}

fn window_phrases(
    docs: &[RawDocument],
    policy: &StopwordPolicy,
    cfg: &DetectorConfig,
) -> Result<WindowPhrases> {
    let streams: Vec<TokenStream> = docs.iter().map(|d| corpus::preprocess(d, policy)).collect();
    let domain = corpus::domain_stopwords(&streams, cfg.domain_fraction);
    let streams: Vec<TokenStream> = streams
        .iter()
        .map(|s| corpus::apply_stopwords(s, &domain))
        .collect();
    let g = build_wcn(&streams, WcnMode::default());
    let threshold = cfg.qualification_nodes();
    let mut phrases = Vec::new();
    let mut subgraphs = Vec::new();
    for comp in g.component_subgraphs() {
        if comp.node_count() < threshold {
            continue;
        }
        let decomposition = phrase::barank_decompose(&comp);
        for piece in decomposition.components {
            if piece.node_count() > cfg.min_event_nodes {
                let phrase = phrase::topo_keyphrase_tagged(
                    &piece,
                    ComponentId(subgraphs.len()),
                    PhraseMethod::Barank,
                )?;
                phrases.push(phrase);
                subgraphs.push(piece);
            }
        }
    }
    Ok(WindowPhrases {
        phrases,
        subgraphs,
        graph: g,
    })
}

/// Partition the stream into consecutive windows of `window_size` documents
/// (the final partial window is processed as-is), extract qualified event
/// phrases per window, rank them with the default comparison matrix, and
/// emit the top `top_n` per window.
pub fn detect_events(
    docs: &[RawDocument],
    policy: &StopwordPolicy,
    cfg: &DetectorConfig,
) -> Result<Vec<EventPhrase>> {
    detect_events_with_pcm(docs, policy, cfg, &Pcm::default_matrix())
}

pub fn detect_events_with_pcm(
    docs: &[RawDocument],
    policy: &StopwordPolicy,
    cfg: &DetectorConfig,
    pcm: &Pcm,
) -> Result<Vec<EventPhrase>> {
    cfg.validate()?;
    let mut events = Vec::new();
    for (window_index, window) in docs.chunks(cfg.window_size).enumerate() {
        let extracted = window_phrases(window, policy, cfg)?;
        if extracted.phrases.is_empty() {
            continue;
        }
        let attrs: Vec<ahp::AhpAttributes> = extracted
            .phrases
            .iter()
            .zip(&extracted.subgraphs)
            .map(|(p, sub)| ahp::compute_attributes_from_subgraph(p, sub, &extracted.graph))
            .collect::<Result<_>>()?;
        let model = ahp::build_model(&attrs, pcm)?;
        let ranked = ahp::rank(&model, &extracted.phrases, SlotThresholds::default())?;
        for r in ranked.into_iter().take(cfg.top_n) {
            events.push(EventPhrase {
                window: window_index,
                rank: r.rank,
                score: r.score,
                words: r.phrase.words,
            });
        }
    }
    Ok(events)
}
