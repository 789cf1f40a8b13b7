//! Structural analysis of a WCN: value distributions, power-law exponent
//! estimation, average shortest path length, assortativity, and the
//! small-world comparison against a seeded Erdos-Renyi baseline.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::wcn::{WcnGraph, WordId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Degree,
    InDegree,
    OutDegree,
    Strength,
    InStrength,
    OutStrength,
    EdgeWeight,
    EdgeStrength,
}

/// Exact histogram of a node or edge quantity plus its probabilities.
/// Edge-strength values are binned by rounding to 3 decimals; bin keys store
/// the value scaled by 1000 so the map stays integer-keyed.
#[derive(Debug, Clone, Serialize)]
pub struct Distribution {
    pub kind: DistributionKind,
    pub histogram: BTreeMap<u64, u64>,
    scale: f64,
}

impl Distribution {
    pub fn from_counts(kind: DistributionKind, histogram: BTreeMap<u64, u64>) -> Distribution {
        let scale = if kind == DistributionKind::EdgeStrength {
            1e-3
        } else {
            1.0
        };
        Distribution {
            kind,
            histogram,
            scale,
        }
    }

    pub fn total(&self) -> u64 {
        self.histogram.values().sum()
    }

    /// (value, probability) pairs in increasing value order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let total = self.total() as f64;
        self.histogram
            .iter()
            .map(|(k, c)| (*k as f64 * self.scale, *c as f64 / total))
            .collect()
    }

    pub fn probability(&self, key: u64) -> f64 {
        self.histogram
            .get(&key)
            .map(|c| *c as f64 / self.total() as f64)
            .unwrap_or(0.0)
    }
}

/// Exact histogram of the requested quantity over a non-empty graph.
pub fn distribution(g: &WcnGraph, kind: DistributionKind) -> Result<Distribution> {
    if g.is_empty() {
        return Err(Error::EmptyInput("distribution of an empty graph".into()));
    }
    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    let mut add = |v: u64| *histogram.entry(v).or_insert(0) += 1;
    match kind {
        DistributionKind::Degree
        | DistributionKind::InDegree
        | DistributionKind::OutDegree
        | DistributionKind::Strength
        | DistributionKind::InStrength
        | DistributionKind::OutStrength => {
            for word in g.nodes() {
                let m = g.node_metrics(word)?;
                add(match kind {
                    DistributionKind::Degree => m.degree,
                    DistributionKind::InDegree => m.in_degree,
                    DistributionKind::OutDegree => m.out_degree,
                    DistributionKind::Strength => m.strength,
                    DistributionKind::InStrength => m.in_strength,
                    DistributionKind::OutStrength => m.out_strength,
                    _ => unreachable!(),
                });
            }
        }
        DistributionKind::EdgeWeight => {
            if g.edge_count() == 0 {
                return Err(Error::EmptyInput("edge distribution of an edgeless graph".into()));
            }
            for (_, _, w) in g.edges() {
                add(u64::from(w));
            }
        }
        DistributionKind::EdgeStrength => {
            if g.edge_count() == 0 {
                return Err(Error::EmptyInput("edge distribution of an edgeless graph".into()));
            }
            for (tail, head, _) in g.edges() {
                let es = g.edge_strength(tail, head)?;
                add((es * 1000.0).round() as u64);
            }
        }
    }
    Ok(Distribution::from_counts(kind, histogram))
}

/// Power-law exponent estimated by least squares on log-log axes.
#[derive(Debug, Clone, Serialize)]
pub struct PowerLawFit {
    pub gamma: f64,
    pub fit_range: (f64, f64),
    pub r_squared: f64,
    pub points_used: usize,
}

/// Fit `p(k) ~ k^-gamma` by least-squares linear regression of `log p` on
/// `log k` over values `>= k_min` with nonzero probability. Each bin is
/// weighted by its sample count: under-populated tail bins (a count of 1
/// pins their probability to `1/total` regardless of `k`) would otherwise
/// flatten the slope on sampled data. On exact tables the weighting is
/// inert, since colinear points fit the same line under any weights.
pub fn fit_power_law(d: &Distribution, k_min: f64) -> Result<PowerLawFit> {
    let total = d.total() as f64;
    let pts: Vec<(f64, f64, f64)> = d
        .points()
        .into_iter()
        .filter(|(k, p)| *k >= k_min && *k > 0.0 && *p > 0.0)
        .map(|(k, p)| (k, p, p * total))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 distinct values >= {k_min}, have {}",
            pts.len()
        )));
    }
    let w_total: f64 = pts.iter().map(|(_, _, w)| w).sum();
    let mean_x = pts.iter().map(|(k, _, w)| w * k.ln()).sum::<f64>() / w_total;
    let mean_y = pts.iter().map(|(_, p, w)| w * p.ln()).sum::<f64>() / w_total;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (k, p, w) in &pts {
        let dx = k.ln() - mean_x;
        let dy = p.ln() - mean_y;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::Fit("all values coincide on the log axis".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(PowerLawFit {
        gamma: -slope,
        fit_range: (pts[0].0, pts[pts.len() - 1].0),
        r_squared,
        points_used: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathView {
    Directed,
    Undirected,
}

/// Mean shortest-path length over reachable pairs. The undirected view
/// averages over unordered pairs, the directed view over ordered reachable
/// pairs. `largest_component_only` restricts to the biggest weakly connected
/// component.
pub fn aspl(g: &WcnGraph, view: PathView, largest_component_only: bool) -> Result<f64> {
    if g.node_count() < 2 {
        return Err(Error::EmptyInput("aspl needs at least 2 nodes".into()));
    }
    let nodes: Vec<WordId> = if largest_component_only {
        let comps = g.component_members();
        comps
            .into_iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.iter().next().cmp(&a.iter().next())))
            .map(|c| c.into_iter().collect())
            .unwrap_or_default()
    } else {
        g.node_ids().collect()
    };
    let index: BTreeMap<WordId, usize> = nodes.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let adjacency: Vec<Vec<usize>> = nodes
        .iter()
        .map(|id| {
            let neigh: Vec<usize> = match view {
                PathView::Directed => g
                    .out_neighbors(*id)
                    .filter_map(|(h, _)| index.get(&h).copied())
                    .collect(),
                PathView::Undirected => g
                    .und_neighbors(*id)
                    .into_iter()
                    .filter_map(|h| index.get(&h).copied())
                    .collect(),
            };
            neigh
        })
        .collect();

    let mut total = 0u64;
    let mut pairs = 0u64;
    for src in 0..nodes.len() {
        let dist = bfs(&adjacency, src);
        for (dst, d) in dist.iter().enumerate() {
            if dst != src {
                if let Some(d) = d {
                    total += u64::from(*d);
                    pairs += 1;
                }
            }
        }
    }
    if pairs == 0 {
        return Err(Error::Undefined("no reachable pair".into()));
    }
    // For the undirected view every unordered pair was counted twice; the
    // mean is unchanged.
    Ok(total as f64 / pairs as f64)
}

fn bfs(adjacency: &[Vec<usize>], src: usize) -> Vec<Option<u32>> {
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

/// Degree-degree Pearson correlation across edges plus its mixing
/// components. `tau` is `None` when the denominator is zero (all endpoint
/// degrees equal).
#[derive(Debug, Clone, Serialize)]
pub struct AssortativityReport {
    pub tau: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub edge_endpoint_degrees: Vec<(u64, u64)>,
}

/// Assortativity on the undirected, unweighted simple view. Internally exact
/// integer arithmetic so the undefined case is detected without rounding.
pub fn assortativity(g: &WcnGraph) -> Result<AssortativityReport> {
    let und = undirected_simple_edges(g);
    if und.is_empty() {
        return Err(Error::EmptyInput("assortativity needs at least one edge".into()));
    }
    let mut degree: BTreeMap<WordId, u64> = BTreeMap::new();
    for id in g.node_ids() {
        degree.insert(id, g.und_neighbors(id).len() as u64);
    }
    let m = und.len() as i128;
    let mut sa: i128 = 0; // sum j*k
    let mut sb: i128 = 0; // sum (j + k)
    let mut sc: i128 = 0; // sum (j^2 + k^2)
    let mut endpoint_degrees = Vec::with_capacity(und.len());
    for (u, v) in &und {
        let j = degree[u] as i128;
        let k = degree[v] as i128;
        sa += j * k;
        sb += j + k;
        sc += j * j + k * k;
        endpoint_degrees.push((j as u64, k as u64));
    }
    // tau = (A/M - (B'/M)^2) / (C/M - (B'/M)^2) with B' = sb/2, C = sc/2;
    // clearing denominators: tau = (4*M*sa - sb^2) / (2*M*sc - sb^2).
    let num = 4 * m * sa - sb * sb;
    let den = 2 * m * sc - sb * sb;
    let tau = if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    };
    Ok(AssortativityReport {
        tau,
        a: sa as f64,
        b: (sb as f64) * (sb as f64) / (4.0 * m as f64),
        c: sc as f64 / 2.0,
        edge_endpoint_degrees: endpoint_degrees,
    })
}

/// Undirected simple edges (u < v): direction collapsed, self-loops dropped.
fn undirected_simple_edges(g: &WcnGraph) -> Vec<(WordId, WordId)> {
    let mut set = std::collections::BTreeSet::new();
    for (t, h, _) in g.edge_ids() {
        if t != h {
            set.insert((t.min(h), t.max(h)));
        }
    }
    set.into_iter().collect()
}

/// Convenience: tau on the undirected unweighted view, `None` when undefined
/// or when the graph has no simple edge.
pub fn tau(g: &WcnGraph) -> Option<f64> {
    assortativity(g).ok().and_then(|r| r.tau)
}

/// Small-world comparison against a seeded Erdos-Renyi graph with the same
/// node count and edge probability.
#[derive(Debug, Clone, Serialize)]
pub struct SmallWorldReport {
    pub cc: f64,
    pub cc_random: f64,
    pub aspl: Option<f64>,
    pub aspl_random: Option<f64>,
    pub verdict: bool,
}

pub fn small_world(g: &WcnGraph, seed: u64) -> Result<SmallWorldReport> {
    small_world_sampled(g, seed, 1)
}

/// Same as [`small_world`] but averaging the random baseline over `samples`
/// independent seeded draws.
pub fn small_world_sampled(g: &WcnGraph, seed: u64, samples: usize) -> Result<SmallWorldReport> {
    if g.is_empty() {
        return Err(Error::EmptyInput("small_world needs a non-empty graph".into()));
    }
    let n = g.node_count();
    let und = undirected_simple_edges(g);
    let possible = n * n.saturating_sub(1) / 2;
    let p = if possible == 0 {
        0.0
    } else {
        und.len() as f64 / possible as f64
    };

    let cc = average_clustering(g);
    let aspl_g = aspl(g, PathView::Undirected, true).ok();

    let samples = samples.max(1);
    let mut cc_sum = 0.0;
    let mut aspl_sum = 0.0;
    let mut aspl_defined = 0usize;
    for i in 0..samples {
        let adj = erdos_renyi(n, p, seed.wrapping_add(i as u64));
        cc_sum += undirected_average_clustering(&adj);
        if let Some(l) = undirected_largest_component_aspl(&adj) {
            aspl_sum += l;
            aspl_defined += 1;
        }
    }
    let cc_random = cc_sum / samples as f64;
    let aspl_random = if aspl_defined > 0 {
        Some(aspl_sum / aspl_defined as f64)
    } else {
        None
    };

    let verdict = match (aspl_g, aspl_random) {
        (Some(l), Some(lr)) if lr > 0.0 && l > 0.0 => {
            let ratio = if l > lr { l / lr } else { lr / l };
            cc > 10.0 * cc_random && cc > 0.0 && ratio <= 2.0
        }
        _ => false,
    };

    Ok(SmallWorldReport {
        cc,
        cc_random,
        aspl: aspl_g,
        aspl_random,
        verdict,
    })
}

/// Mean clustering coefficient over all nodes.
pub fn average_clustering(g: &WcnGraph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    let sum: f64 = g
        .node_ids()
        .map(|id| g.clustering_coefficient_id(id))
        .sum();
    sum / n as f64
}

fn erdos_renyi(n: usize, p: f64, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

fn undirected_average_clustering(adj: &[Vec<usize>]) -> f64 {
    if adj.is_empty() {
        return 0.0;
    }
    let sets: Vec<std::collections::BTreeSet<usize>> = adj
        .iter()
        .map(|n| n.iter().copied().collect())
        .collect();
    let mut sum = 0.0;
    for neigh in &sets {
        let k = neigh.len();
        if k < 2 {
            continue;
        }
        let neigh: Vec<usize> = neigh.iter().copied().collect();
        let mut linked = 0u64;
        for a in 0..neigh.len() {
            for b in a + 1..neigh.len() {
                if sets[neigh[a]].contains(&neigh[b]) {
                    linked += 1;
                }
            }
        }
        sum += 2.0 * linked as f64 / (k as f64 * (k as f64 - 1.0));
    }
    sum / adj.len() as f64
}

fn undirected_largest_component_aspl(adj: &[Vec<usize>]) -> Option<f64> {
    let n = adj.len();
    if n == 0 {
        return None;
    }
    let mut seen = vec![false; n];
    let mut largest: Vec<usize> = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut members = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            members.push(u);
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if members.len() > largest.len() {
            largest = members;
        }
    }
    if largest.len() < 2 {
        return None;
    }
    let index: BTreeMap<usize, usize> = largest.iter().enumerate().map(|(i, u)| (*u, i)).collect();
    let local: Vec<Vec<usize>> = largest
        .iter()
        .map(|u| adj[*u].iter().filter_map(|v| index.get(v).copied()).collect())
        .collect();
    let mut total = 0u64;
    let mut pairs = 0u64;
    for src in 0..local.len() {
        for (dst, d) in bfs(&local, src).iter().enumerate() {
            if dst != src {
                if let Some(d) = d {
                    total += u64::from(*d);
                    pairs += 1;
                }
            }
        }
    }
    if pairs == 0 {
        None
    } else {
        Some(total as f64 / pairs as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wcn::WcnGraph;

    #[test]
    fn star_degree_histogram() {
        let g = WcnGraph::from_weighted_edges(&[("hub", "a", 1), ("hub", "b", 1), ("hub", "c", 1)]);
        let d = distribution(&g, DistributionKind::Degree).unwrap();
        assert_eq!(d.histogram, BTreeMap::from([(1, 3), (3, 1)]));
        let total: f64 = d.points().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn path_in_degree_histogram() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 1), ("b", "c", 1)]);
        let d = distribution(&g, DistributionKind::InDegree).unwrap();
        assert_eq!(d.histogram, BTreeMap::from([(0, 1), (1, 2)]));
    }

    #[test]
    fn edge_weight_histogram() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 1), ("c", "d", 1), ("e", "f", 2)]);
        let d = distribution(&g, DistributionKind::EdgeWeight).unwrap();
        assert_eq!(d.histogram, BTreeMap::from([(1, 2), (2, 1)]));
    }

    #[test]
    fn empty_graph_distribution_errors() {
        let g = crate::wcn::build_wcn(&[], crate::wcn::WcnMode::default());
        assert!(distribution(&g, DistributionKind::Degree).is_err());
    }

    #[test]
    fn exact_power_law_table_recovers_exponent() {
        // p(k) = k^-2 at k in {1, 2, 4, 8}; normalization shifts the
        // intercept, not the slope.
        let mut hist = BTreeMap::new();
        hist.insert(1u64, 6400u64);
        hist.insert(2, 1600);
        hist.insert(4, 400);
        hist.insert(8, 100);
        let d = Distribution::from_counts(DistributionKind::Degree, hist);
        let fit = fit_power_law(&d, 1.0).unwrap();
        assert!((fit.gamma - 2.0).abs() < 1e-6, "gamma = {}", fit.gamma);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_distribution_has_zero_exponent() {
        let mut hist = BTreeMap::new();
        for k in [1u64, 2, 3, 5, 9] {
            hist.insert(k, 7);
        }
        let d = Distribution::from_counts(DistributionKind::Degree, hist);
        let fit = fit_power_law(&d, 1.0).unwrap();
        assert!(fit.gamma.abs() < 1e-6);
    }

    #[test]
    fn fit_needs_three_points() {
        let mut hist = BTreeMap::new();
        hist.insert(1u64, 5);
        hist.insert(2, 3);
        let d = Distribution::from_counts(DistributionKind::Degree, hist);
        assert!(fit_power_law(&d, 1.0).is_err());
    }

    #[test]
    fn aspl_undirected_path() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 1), ("b", "c", 1)]);
        let l = aspl(&g, PathView::Undirected, false).unwrap();
        assert!((l - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn aspl_complete_graph_is_one() {
        let mut edges = Vec::new();
        let names = ["a", "b", "c", "d"];
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((names[i], names[j], 1));
            }
        }
        let g = WcnGraph::from_weighted_edges(&edges);
        let l = aspl(&g, PathView::Undirected, false).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aspl_directed_chain_counts_reachable_ordered_pairs() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 1), ("b", "c", 1)]);
        let l = aspl(&g, PathView::Directed, false).unwrap();
        assert!((l - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn assortativity_star_is_minus_one() {
        let g = WcnGraph::from_weighted_edges(&[("hub", "a", 1), ("hub", "b", 1), ("hub", "c", 1)]);
        let r = assortativity(&g).unwrap();
        assert!((r.tau.unwrap() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn assortativity_complete_graph_is_undefined() {
        let mut edges = Vec::new();
        let names = ["a", "b", "c", "d"];
        for i in 0..4 {
            for j in i + 1..4 {
                edges.push((names[i], names[j], 1));
            }
        }
        let g = WcnGraph::from_weighted_edges(&edges);
        assert!(assortativity(&g).unwrap().tau.is_none());
    }

    #[test]
    fn assortativity_path_of_four() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 1), ("b", "c", 1), ("c", "d", 1)]);
        let r = assortativity(&g).unwrap();
        assert!((r.tau.unwrap() + 0.5).abs() < 1e-9);
    }

    #[test]
    fn assortativity_invariant_under_edge_reversal() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 2), ("b", "c", 1), ("a", "d", 3)]);
        let rev = WcnGraph::from_weighted_edges(&[("b", "a", 2), ("c", "b", 1), ("d", "a", 3)]);
        assert_eq!(tau(&g), tau(&rev));
    }

    #[test]
    fn closing_a_star_tip_pair_raises_tau() {
        let star = WcnGraph::from_weighted_edges(&[
            ("hub", "a", 1),
            ("hub", "b", 1),
            ("hub", "c", 1),
        ]);
        let closed = WcnGraph::from_weighted_edges(&[
            ("hub", "a", 1),
            ("hub", "b", 1),
            ("hub", "c", 1),
            ("a", "b", 1),
        ]);
        assert!(tau(&closed).unwrap() > tau(&star).unwrap());
    }

    #[test]
    fn er_graph_is_not_its_own_small_world() {
        // Compare an ER draw against the ER baseline: the clustering ratio
        // hovers near 1, so the verdict must be false.
        let adj = erdos_renyi(60, 0.15, 7);
        let mut edges = Vec::new();
        let names: Vec<String> = (0..60).map(|i| format!("n{i:02}")).collect();
        for (i, neigh) in adj.iter().enumerate() {
            for &j in neigh {
                if j > i {
                    edges.push((names[i].as_str(), names[j].as_str(), 1));
                }
            }
        }
        let owned: Vec<(&str, &str, u32)> = edges.clone();
        let g = WcnGraph::from_weighted_edges(&owned);
        let report = small_world(&g, 99).unwrap();
        assert!(!report.verdict, "cc {} vs {}", report.cc, report.cc_random);
    }

    #[test]
    fn triangle_free_graph_is_not_small_world() {
        let g = WcnGraph::from_weighted_edges(&[("a", "b", 1), ("b", "c", 1), ("c", "d", 1)]);
        let report = small_world(&g, 1).unwrap();
        assert_eq!(report.cc, 0.0);
        assert!(!report.verdict);
    }

    #[test]
    fn clustered_short_path_graph_is_small_world() {
        // Ring lattice (each node tied to 4 neighbours per side) with
        // alternating half- and quarter-ring chords: high clustering, short
        // paths.
        let n = 180usize;
        let names: Vec<String> = (0..n).map(|i| format!("n{i:03}")).collect();
        let mut edges: Vec<(&str, &str, u32)> = Vec::new();
        for i in 0..n {
            for step in 1..=4usize {
                let j = (i + step) % n;
                edges.push((names[i].as_str(), names[j].as_str(), 1));
            }
        }
        for (c, i) in (0..n).step_by(6).enumerate() {
            let jump = if c % 2 == 0 { n / 2 } else { n / 4 + 1 };
            let j = (i + jump) % n;
            edges.push((names[i].as_str(), names[j].as_str(), 1));
        }
        let g = WcnGraph::from_weighted_edges(&edges);
        let report = small_world(&g, 4242).unwrap();
        assert!(
            report.verdict,
            "cc {} cc_r {} aspl {:?} aspl_r {:?}",
            report.cc, report.cc_random, report.aspl, report.aspl_random
        );
    }
}
