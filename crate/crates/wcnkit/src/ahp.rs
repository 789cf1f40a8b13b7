//! Contextual ranking of keyphrases with the analytic hierarchy process.
//!
//! Four graph-derived attributes feed a decision matrix that is normalized
//! (ESD, PD, DC beneficiary; SD non-beneficiary), weighted by the geometric
//! means of a Saaty pairwise comparison matrix, and scored. Ranked phrases
//! are classified into the three slots (headline / description / relevant)
//! by word count.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::phrase::Keyphrase;
use crate::wcn::{WcnGraph, WordId};
use crate::{Error, Result};

/// Attribute values of one keyphrase.
///
/// - `esd`: sum of internal edge weights per edge.
/// - `sd`: esd minus the mean of the first element's in-strength and the
///   last element's out-strength; defined as 0 when the phrase has no
///   external strength at either boundary.
/// - `pd`: total degree of the phrase words minus the internal edge
///   endpoints, i.e. the count of external edge attachments.
/// - `dc`: (in-degree of first element + out-degree of last element) / pd,
///   defined as 1 when pd = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AhpAttributes {
    pub esd: f64,
    pub sd: f64,
    pub pd: u64,
    pub dc: f64,
}

/// Attributes of a phrase whose words form a directed path in `g`: internal
/// edges are exactly the consecutive path edges.
pub fn compute_attributes(phrase: &Keyphrase, g: &WcnGraph) -> Result<AhpAttributes> {
    if phrase.words.len() < 2 {
        return Err(Error::Contract("phrase needs at least 2 words".into()));
    }
    let ids = resolve_ids(&phrase.words, g)?;
    let mut internal = Vec::with_capacity(ids.len() - 1);
    for pair in ids.windows(2) {
        match g.weight_ids(pair[0], pair[1]) {
            Some(w) => internal.push((pair[0], pair[1], w)),
            None => {
                return Err(Error::Contract(format!(
                    "phrase words do not form a path in the graph: no edge {} -> {}",
                    g.lexicon().word(pair[0]),
                    g.lexicon().word(pair[1])
                )))
            }
        }
    }
    Ok(attributes_from_internal(&ids, &internal, g))
}

/// Attributes of a phrase extracted from a subgraph that need not be a
/// path (topological-sort phrases): the subgraph's surviving edges are the
/// internal set. For path-shaped subgraphs this coincides with
/// [`compute_attributes`].
pub fn compute_attributes_from_subgraph(
    phrase: &Keyphrase,
    subgraph: &WcnGraph,
    g: &WcnGraph,
) -> Result<AhpAttributes> {
    if phrase.words.len() < 2 {
        return Err(Error::Contract("phrase needs at least 2 words".into()));
    }
    let ids = resolve_ids(&phrase.words, g)?;
    let internal: Vec<(WordId, WordId, u32)> = subgraph.edge_ids().collect();
    Ok(attributes_from_internal(&ids, &internal, g))
}

/// Attributes of a phrase given only its word order: internal edges are all
/// graph edges between phrase words that point forward in the order. For a
/// strict path without skip edges this coincides with
/// [`compute_attributes`]; use it to re-rank topological phrases loaded from
/// a report, where the source subgraph is no longer available.
pub fn compute_attributes_forward_induced(
    phrase: &Keyphrase,
    g: &WcnGraph,
) -> Result<AhpAttributes> {
    if phrase.words.len() < 2 {
        return Err(Error::Contract("phrase needs at least 2 words".into()));
    }
    let ids = resolve_ids(&phrase.words, g)?;
    let position: std::collections::BTreeMap<WordId, usize> =
        ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut internal = Vec::new();
    for &u in &ids {
        for (v, w) in g.out_neighbors(u) {
            if let Some(&pv) = position.get(&v) {
                if position[&u] < pv {
                    internal.push((u, v, w));
                }
            }
        }
    }
    if internal.is_empty() {
        return Err(Error::Contract(
            "phrase words share no forward edge in the graph".into(),
        ));
    }
    Ok(attributes_from_internal(&ids, &internal, g))
}

fn resolve_ids(words: &[String], g: &WcnGraph) -> Result<Vec<WordId>> {
    words
        .iter()
        .map(|w| {
            g.lexicon()
                .id(w)
                .filter(|_| g.contains_word(w))
                .ok_or_else(|| Error::UnknownWord(w.clone()))
        })
        .collect()
}

fn attributes_from_internal(
    ids: &[WordId],
    internal: &[(WordId, WordId, u32)],
    g: &WcnGraph,
) -> AhpAttributes {
    let edge_count = internal.len().max(1) as f64;
    let weight_sum: u64 = internal.iter().map(|(_, _, w)| u64::from(*w)).sum();
    let esd = weight_sum as f64 / edge_count;

    let first = ids[0];
    let last = ids[ids.len() - 1];
    let in_strength = g.in_strength_id(first);
    let out_strength = g.out_strength_id(last);
    let sd = if in_strength == 0 && out_strength == 0 {
        // No external strength at either boundary: the phrase is
        // self-contained, which is the best case for this attribute.
        0.0
    } else {
        esd - (in_strength + out_strength) as f64 / 2.0
    };

    let degree_sum: u64 = ids.iter().map(|id| g.degree_id(*id)).sum();
    let pd = degree_sum - 2 * internal.len() as u64;
    let dc = if pd == 0 {
        1.0
    } else {
        (g.in_degree_id(first) + g.out_degree_id(last)) as f64 / pd as f64
    };

    AhpAttributes { esd, sd, pd, dc }
}

/// A positive reciprocal 4x4 pairwise comparison matrix over the attributes
/// (ESD, SD, PD, DC).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pcm(pub [[f64; 4]; 4]);

impl Pcm {
    /// The built-in comparison matrix: ESD strongly dominates, PD is next,
    /// SD and DC are equally minor. Sub-unit entries are exact reciprocals.
    pub fn default_matrix() -> Pcm {
        let third = 1.0 / 3.0;
        let fifth = 1.0 / 5.0;
        Pcm([
            [1.0, 5.0, 3.0, 5.0],
            [fifth, 1.0, third, 1.0],
            [third, 3.0, 1.0, 3.0],
            [fifth, 1.0, third, 1.0],
        ])
    }

    /// Parse a whitespace-separated 4x4 matrix. Entries may be printed
    /// roundings of reciprocals (0.33 vs 3.0); each off-diagonal pair is
    /// validated to be near-reciprocal and canonicalized from its >= 1 side,
    /// so reciprocity holds exactly after parsing.
    pub fn parse(text: &str) -> Result<Pcm> {
        let numbers: Vec<f64> = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| Error::MalformedRecord {
                    line: 0,
                    message: format!("not a number: {tok}"),
                })
            })
            .collect::<Result<_>>()?;
        if numbers.len() != 16 {
            return Err(Error::MalformedRecord {
                line: 0,
                message: format!("expected 16 numbers for a 4x4 matrix, got {}", numbers.len()),
            });
        }
        let mut m = [[0.0f64; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let v = numbers[i * 4 + j];
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::MalformedRecord {
                        line: 0,
                        message: format!("entry ({i},{j}) must be positive, got {v}"),
                    });
                }
                *cell = v;
            }
        }
        for (i, row) in m.iter().enumerate() {
            if (row[i] - 1.0).abs() > 1e-9 {
                return Err(Error::MalformedRecord {
                    line: 0,
                    message: format!("diagonal entry ({i},{i}) must be 1"),
                });
            }
        }
        #[allow(clippy::needless_range_loop)]
        for i in 0..4 {
            for j in i + 1..4 {
                let product = m[i][j] * m[j][i];
                if (product - 1.0).abs() > 0.02 {
                    return Err(Error::MalformedRecord {
                        line: 0,
                        message: format!(
                            "entries ({i},{j}) and ({j},{i}) are not reciprocal: {} * {} = {product}",
                            m[i][j], m[j][i]
                        ),
                    });
                }
                if m[i][j] >= 1.0 {
                    m[j][i] = 1.0 / m[i][j];
                } else {
                    m[i][j] = 1.0 / m[j][i];
                }
            }
        }
        Ok(Pcm(m))
    }

    pub fn from_file(path: &Path) -> Result<Pcm> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Pcm::parse(&text)
    }
}

/// Random index values for matrices of size 2..=10.
const RANDOM_INDEX: [f64; 9] = [0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.51];

/// Decision model: the raw and normalized matrices, attribute weights, and
/// consistency diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct AhpModel {
    pub decision_matrix: Vec<[f64; 4]>,
    pub normalized: Vec<[f64; 4]>,
    pub pcm: Pcm,
    pub weights: [f64; 4],
    pub gm: f64,
    pub lambda_max: f64,
    pub ci: f64,
    pub cr: f64,
    pub ri: f64,
}

/// Build and validate the model. ESD, PD, DC normalize against their column
/// maximum; SD against its minimum (best = lowest), with degenerate columns
/// resolving to 1. Fails when CR >= 0.1.
pub fn build_model(attrs: &[AhpAttributes], pcm: &Pcm) -> Result<AhpModel> {
    if attrs.is_empty() {
        return Err(Error::EmptyInput("ahp needs at least one alternative".into()));
    }
    let decision_matrix: Vec<[f64; 4]> = attrs
        .iter()
        .map(|a| [a.esd, a.sd, a.pd as f64, a.dc])
        .collect();

    let mut normalized = vec![[0.0f64; 4]; attrs.len()];
    for col in [0usize, 2, 3] {
        let max = decision_matrix
            .iter()
            .map(|r| r[col])
            .fold(f64::NEG_INFINITY, f64::max);
        for (i, row) in decision_matrix.iter().enumerate() {
            normalized[i][col] = if max > 0.0 { row[col] / max } else { 1.0 };
        }
    }
    {
        // Non-beneficiary column: shift negatives to zero first; the column
        // minimum always normalizes to 1.
        let col = 1usize;
        let min = decision_matrix
            .iter()
            .map(|r| r[col])
            .fold(f64::INFINITY, f64::min);
        let shift = if min < 0.0 { -min } else { 0.0 };
        let shifted_min = min + shift;
        for (i, row) in decision_matrix.iter().enumerate() {
            let v = row[col] + shift;
            normalized[i][col] = if v == shifted_min || v == 0.0 {
                if v == shifted_min {
                    1.0
                } else {
                    0.0
                }
            } else {
                shifted_min / v
            };
        }
    }

    let m = &pcm.0;
    let mut row_gm = [0.0f64; 4];
    for i in 0..4 {
        let product: f64 = m[i].iter().product();
        row_gm[i] = product.powf(0.25);
    }
    let gm: f64 = row_gm.iter().sum();
    let weights = [
        row_gm[0] / gm,
        row_gm[1] / gm,
        row_gm[2] / gm,
        row_gm[3] / gm,
    ];

    let mut lambda_sum = 0.0;
    for i in 0..4 {
        let axw: f64 = (0..4).map(|j| m[i][j] * weights[j]).sum();
        lambda_sum += axw / weights[i];
    }
    let lambda_max = lambda_sum / 4.0;
    let ci = (lambda_max - 4.0) / 3.0;
    let ri = RANDOM_INDEX[4 - 2];
    let cr = ci / ri;
    if cr >= 0.1 {
        return Err(Error::InconsistentMatrix { cr });
    }

    Ok(AhpModel {
        decision_matrix,
        normalized,
        pcm: pcm.clone(),
        weights,
        gm,
        lambda_max,
        ci,
        cr,
        ri,
    })
}

/// Slot classification thresholds over phrase word counts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlotThresholds {
    /// Phrases with at most this many words are `relevant`.
    pub relevant_max: usize,
    /// Phrases with more than this many words are `description`.
    pub headline_max: usize,
}

impl Default for SlotThresholds {
    fn default() -> Self {
        SlotThresholds {
            relevant_max: 3,
            headline_max: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Headline,
    Description,
    Relevant,
}

impl SlotThresholds {
    pub fn classify(&self, word_count: usize) -> Slot {
        if word_count > self.headline_max {
            Slot::Description
        } else if word_count <= self.relevant_max {
            Slot::Relevant
        } else {
            Slot::Headline
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedPhrase {
    pub phrase: Keyphrase,
    pub score: f64,
    pub rank: usize,
    pub slot: Slot,
}

/// Score every alternative as normalized-row x weights, order descending
/// (ties by word sequence), assign ranks 1..n and slots.
pub fn rank(
    model: &AhpModel,
    phrases: &[Keyphrase],
    thresholds: SlotThresholds,
) -> Result<Vec<RankedPhrase>> {
    if phrases.len() != model.normalized.len() {
        return Err(Error::Contract(format!(
            "{} phrases but {} alternatives in the model",
            phrases.len(),
            model.normalized.len()
        )));
    }
    let mut scored: Vec<(usize, f64)> = model
        .normalized
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let s: f64 = row
                .iter()
                .zip(&model.weights)
                .map(|(nv, w)| nv * w)
                .sum();
            (i, s)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| phrases[a.0].words.cmp(&phrases[b.0].words))
    });
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(pos, (idx, score))| RankedPhrase {
            phrase: phrases[idx].clone(),
            score,
            rank: pos + 1,
            slot: thresholds.classify(phrases[idx].words.len()),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phrase::{Keyphrase, PhraseMethod};
    use crate::wcn::{ComponentId, WcnGraph};

    fn phrase(words: &[&str]) -> Keyphrase {
        Keyphrase {
            words: words.iter().map(|w| w.to_string()).collect(),
            density: 0.0,
            source_component: ComponentId(0),
            method: PhraseMethod::Mls,
        }
    }

    #[test]
    fn isolated_pair_attributes() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 4)]);
        let attrs = compute_attributes(&phrase(&["a", "b"]), &g).unwrap();
        assert_eq!(attrs.esd, 4.0);
        assert_eq!(attrs.sd, 0.0);
        assert_eq!(attrs.pd, 0);
        assert_eq!(attrs.dc, 1.0);
    }

    #[test]
    fn pair_with_one_external_in_edge() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 1), ("c", "a", 1)]);
        let attrs = compute_attributes(&phrase(&["a", "b"]), &g).unwrap();
        assert_eq!(attrs.esd, 1.0);
        assert!((attrs.sd - 0.5).abs() < 1e-12);
        assert_eq!(attrs.pd, 1);
        assert_eq!(attrs.dc, 1.0);
    }

    #[test]
    fn embedded_path_attributes_by_hand() {
        // 3-word path p1->p2->p3 (weights 2 and 4) inside a 6-node graph
        // with two external edges touching the middle word.
        let g = WcnGraph::from_weighted_edges(&[
            ("p1", "p2", 2),
            ("p2", "p3", 4),
            ("x", "p2", 1),
            ("p2", "y", 3),
            ("x", "y", 1),
        ]);
        let attrs = compute_attributes(&phrase(&["p1", "p2", "p3"]), &g).unwrap();
        assert_eq!(attrs.esd, 3.0);
        // first element p1 has no in-edges, last element p3 no out-edges.
        assert_eq!(attrs.sd, 0.0);
        assert_eq!(attrs.pd, 2);
        assert_eq!(attrs.dc, 0.0);
    }

    #[test]
    fn non_path_phrase_is_a_contract_error() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 1), ("c", "b", 1)]);
        assert!(matches!(
            compute_attributes(&phrase(&["a", "c", "b"]), &g),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn default_pcm_consistency_diagnostics() {
        let model = build_model(
            &[AhpAttributes {
                esd: 1.0,
                sd: 0.0,
                pd: 1,
                dc: 1.0,
            }],
            &Pcm::default_matrix(),
        )
        .unwrap();
        assert_eq!(model.ri, 0.90);
        assert!((model.ci - 0.014444).abs() < 5e-4, "ci = {}", model.ci);
        assert!((model.cr - 0.0162).abs() < 1e-3, "cr = {}", model.cr);
        let expected = [0.5585, 0.0960, 0.2492, 0.0960];
        for (w, e) in model.weights.iter().zip(expected) {
            assert!((w - e).abs() < 1e-3, "weights = {:?}", model.weights);
        }
        let sum: f64 = model.weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn all_ones_pcm_is_perfectly_consistent() {
        let pcm = Pcm([[1.0; 4]; 4]);
        let model = build_model(
            &[AhpAttributes {
                esd: 1.0,
                sd: 0.0,
                pd: 0,
                dc: 1.0,
            }],
            &pcm,
        )
        .unwrap();
        for w in model.weights {
            assert!((w - 0.25).abs() < 1e-12);
        }
        assert!(model.ci.abs() < 1e-12);
        assert!(model.cr.abs() < 1e-12);
    }

    #[test]
    fn inconsistent_pcm_is_rejected() {
        let ninth = 1.0 / 9.0;
        let pcm = Pcm([
            [1.0, 9.0, ninth, 9.0],
            [ninth, 1.0, 9.0, ninth],
            [9.0, ninth, 1.0, 9.0],
            [ninth, 9.0, ninth, 1.0],
        ]);
        let attrs = [AhpAttributes {
            esd: 1.0,
            sd: 0.0,
            pd: 0,
            dc: 1.0,
        }];
        assert!(matches!(
            build_model(&attrs, &pcm),
            Err(Error::InconsistentMatrix { .. })
        ));
    }

    #[test]
    fn pcm_parse_canonicalizes_printed_roundings() {
        let text = "1.00 5.00 3.00 5.00\n0.20 1.00 0.33 1.00\n0.33 3.00 1.00 3.00\n0.20 1.00 0.33 1.00\n";
        let pcm = Pcm::parse(text).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((pcm.0[i][j] * pcm.0[j][i] - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(pcm, Pcm::default_matrix());
    }

    #[test]
    fn pcm_parse_rejects_garbage() {
        assert!(Pcm::parse("1 2 3").is_err());
        assert!(Pcm::parse(&"0 ".repeat(16)).is_err());
        let non_reciprocal =
            "1 2 1 1\n1 1 1 1\n1 1 1 1\n1 1 1 1\n";
        assert!(Pcm::parse(non_reciprocal).is_err());
    }

    #[test]
    fn single_alternative_scores_one() {
        let attrs = [AhpAttributes {
            esd: 7.0,
            sd: 3.0,
            pd: 4,
            dc: 0.5,
        }];
        let model = build_model(&attrs, &Pcm::default_matrix()).unwrap();
        let ranked = rank(&model, &[phrase(&["a", "b"])], SlotThresholds::default()).unwrap();
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].rank, 1);
        assert!((ranked[0].score - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dominant_alternative_ranks_first() {
        let attrs = [
            AhpAttributes {
                esd: 10.0,
                sd: 0.5,
                pd: 20,
                dc: 0.9,
            },
            AhpAttributes {
                esd: 4.0,
                sd: 2.0,
                pd: 5,
                dc: 0.3,
            },
        ];
        let model = build_model(&attrs, &Pcm::default_matrix()).unwrap();
        let phrases = [phrase(&["big", "one"]), phrase(&["small", "two"])];
        let ranked = rank(&model, &phrases, SlotThresholds::default()).unwrap();
        assert_eq!(ranked[0].phrase.words, ["big", "one"]);
        assert!((ranked[0].score - 1.0).abs() < 1e-9);
        assert!(ranked[1].score < 1.0 && ranked[1].score > 0.0);
    }

    #[test]
    fn slots_follow_word_counts() {
        let thresholds = SlotThresholds::default();
        assert_eq!(thresholds.classify(6), Slot::Headline);
        assert_eq!(thresholds.classify(16), Slot::Description);
        assert_eq!(thresholds.classify(2), Slot::Relevant);
        assert_eq!(thresholds.classify(12), Slot::Headline);
        assert_eq!(thresholds.classify(13), Slot::Description);
        assert_eq!(thresholds.classify(3), Slot::Relevant);
    }

    #[test]
    fn ranking_invariant_under_column_scaling() {
        let base = [
            AhpAttributes { esd: 6.0, sd: 1.0, pd: 10, dc: 0.4 },
            AhpAttributes { esd: 2.0, sd: 0.5, pd: 30, dc: 0.8 },
            AhpAttributes { esd: 4.0, sd: 2.0, pd: 20, dc: 0.1 },
        ];
        let scaled: Vec<AhpAttributes> = base
            .iter()
            .map(|a| AhpAttributes {
                esd: a.esd * 3.0,
                ..*a
            })
            .collect();
        let phrases = [
            phrase(&["p", "one"]),
            phrase(&["p", "two"]),
            phrase(&["p", "three"]),
        ];
        let m1 = build_model(&base, &Pcm::default_matrix()).unwrap();
        let m2 = build_model(&scaled, &Pcm::default_matrix()).unwrap();
        let r1: Vec<Vec<String>> = rank(&m1, &phrases, SlotThresholds::default())
            .unwrap()
            .into_iter()
            .map(|r| r.phrase.words)
            .collect();
        let r2: Vec<Vec<String>> = rank(&m2, &phrases, SlotThresholds::default())
            .unwrap()
            .into_iter()
            .map(|r| r.phrase.words)
            .collect();
        assert_eq!(r1, r2);
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        let attrs = [
            AhpAttributes { esd: 6.0, sd: 1.0, pd: 10, dc: 0.4 },
            AhpAttributes { esd: 2.0, sd: 0.0, pd: 30, dc: 0.8 },
            AhpAttributes { esd: 4.0, sd: -2.0, pd: 20, dc: 0.1 },
        ];
        let model = build_model(&attrs, &Pcm::default_matrix()).unwrap();
        let phrases = [
            phrase(&["p", "one"]),
            phrase(&["p", "two"]),
            phrase(&["p", "three"]),
        ];
        for r in rank(&model, &phrases, SlotThresholds::default()).unwrap() {
            assert!(r.score > 0.0 && r.score <= 1.0 + 1e-12, "score {}", r.score);
        }
    }
}
