//! The 2K-annotated metric battery: CCDFs, annotated distributions,
//! degree-binned averages, JDD projections, clustering, and power-law
//! exponent estimation.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AnnotatedGraph, LinkKind, NodeClass};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("graph has no nodes matching the request")]
    EmptyGraph,
    #[error("graph has no links of the requested kind")]
    NoSuchLinks,
    #[error("not enough tail samples for a power-law fit")]
    InsufficientTail,
}

/// Which of the three per-node degree counts to look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeKind {
    Customers,
    Providers,
    Peers,
}

/// Empirical complementary CDF: fraction of the population at or above
/// each observed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfSeries {
    pub points: Vec<(u64, f64)>,
}

impl CcdfSeries {
    pub fn from_samples(samples: &[u64]) -> Result<Self, MetricsError> {
        if samples.is_empty() {
            return Err(MetricsError::EmptyGraph);
        }
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for &s in samples {
            *counts.entry(s).or_insert(0) += 1;
        }
        let n = samples.len() as f64;
        let mut at_or_above = samples.len() as u64;
        let mut points = Vec::with_capacity(counts.len());
        for (&value, &count) in &counts {
            points.push((value, at_or_above as f64 / n));
            at_or_above -= count;
        }
        Ok(CcdfSeries { points })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,fraction\n");
        for (v, f) in &self.points {
            out.push_str(&format!("{v},{f}\n"));
        }
        out
    }
}

/// Degree-binned averages: raw bins up to degree 16, base-2 log bins above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedSeries {
    pub points: Vec<BinPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinPoint {
    pub key: f64,
    pub mean: f64,
    pub count: u64,
}

impl BinnedSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,mean,count\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.key, p.mean, p.count));
        }
        out
    }

    pub fn total_count(&self) -> u64 {
        self.points.iter().map(|p| p.count).sum()
    }
}

const RAW_BIN_LIMIT: u64 = 16;

/// Sortable bin index: identity below the raw limit, log2 bucket above.
fn bin_index(k: u64) -> u64 {
    if k <= RAW_BIN_LIMIT {
        k
    } else {
        RAW_BIN_LIMIT + k.ilog2() as u64
    }
}

fn bin_key(index: u64) -> f64 {
    if index <= RAW_BIN_LIMIT {
        index as f64
    } else {
        let j = (index - RAW_BIN_LIMIT) as u32;
        // arithmetic midpoint of [2^j, 2^(j+1) - 1]
        ((1u64 << j) + (1u64 << (j + 1)) - 1) as f64 / 2.0
    }
}

#[derive(Default)]
struct BinAccumulator {
    bins: BTreeMap<u64, (f64, u64)>,
}

impl BinAccumulator {
    fn record(&mut self, x: u64, y: f64) {
        let entry = self.bins.entry(bin_index(x)).or_insert((0.0, 0));
        entry.0 += y;
        entry.1 += 1;
    }

    fn finish(self) -> BinnedSeries {
        let points = self
            .bins
            .into_iter()
            .map(|(idx, (sum, count))| BinPoint {
                key: bin_key(idx),
                mean: sum / count as f64,
                count,
            })
            .collect();
        BinnedSeries { points }
    }
}

fn class_nodes<'a>(
    graph: &'a AnnotatedGraph,
    class_filter: Option<NodeClass>,
) -> impl Iterator<Item = usize> + 'a {
    graph
        .node_ids()
        .filter(move |&id| class_filter.map_or(true, |c| graph.node_class(id) == c))
}

fn degree_of(graph: &AnnotatedGraph, node: usize, kind: DegreeKind) -> u64 {
    let dv = graph.degree_vector(node).expect("node exists");
    match kind {
        DegreeKind::Customers => dv.customers as u64,
        DegreeKind::Providers => dv.providers as u64,
        DegreeKind::Peers => dv.peers as u64,
    }
}

/// CCDF of total node degree, optionally restricted to one class.
pub fn degree_ccdf(
    graph: &AnnotatedGraph,
    class_filter: Option<NodeClass>,
) -> Result<CcdfSeries, MetricsError> {
    let samples: Vec<u64> = class_nodes(graph, class_filter)
        .map(|id| graph.total_degree(id) as u64)
        .collect();
    CcdfSeries::from_samples(&samples)
}

/// CCDF of one degree type over one class (the annotated distributions).
pub fn annotated_ccdf(
    graph: &AnnotatedGraph,
    which: DegreeKind,
    class_filter: Option<NodeClass>,
) -> Result<CcdfSeries, MetricsError> {
    let samples: Vec<u64> = class_nodes(graph, class_filter)
        .map(|id| degree_of(graph, id, which))
        .collect();
    CcdfSeries::from_samples(&samples)
}

/// Raw per-node samples of one degree type over one class. Handy for
/// exponent fitting, where the CCDF itself is not the right input.
pub fn degree_samples(
    graph: &AnnotatedGraph,
    which: Option<DegreeKind>,
    class_filter: Option<NodeClass>,
) -> Vec<u64> {
    class_nodes(graph, class_filter)
        .map(|id| match which {
            None => graph.total_degree(id) as u64,
            Some(kind) => degree_of(graph, id, kind),
        })
        .collect()
}

/// ADD projection: ISPs binned by provider count, averaging the chosen
/// degree type per bin.
pub fn add_binned(graph: &AnnotatedGraph, y: DegreeKind) -> Result<BinnedSeries, MetricsError> {
    let mut acc = BinAccumulator::default();
    let mut seen = false;
    for id in class_nodes(graph, Some(NodeClass::Isp)) {
        seen = true;
        let providers = degree_of(graph, id, DegreeKind::Providers);
        acc.record(providers, degree_of(graph, id, y) as f64);
    }
    if !seen {
        return Err(MetricsError::EmptyGraph);
    }
    Ok(acc.finish())
}

/// JDD projection: for each total degree k, the mean total degree of the
/// nodes reached over links of the given kind. For c2p links the traversal
/// is customer to provider. `normalize` divides by (n - 1).
pub fn jdd_avg_neighbor(
    graph: &AnnotatedGraph,
    kind: LinkKind,
    normalize: bool,
) -> Result<BinnedSeries, MetricsError> {
    let mut acc = BinAccumulator::default();
    let scale = if normalize {
        1.0 / (graph.node_count().saturating_sub(1).max(1)) as f64
    } else {
        1.0
    };
    let mut seen = false;
    for link in graph.links() {
        if link.kind != kind {
            continue;
        }
        seen = true;
        match kind {
            LinkKind::C2p => {
                let cust = link.customer.expect("c2p has a customer");
                let prov = link.provider().unwrap();
                acc.record(
                    graph.total_degree(cust) as u64,
                    graph.total_degree(prov) as f64 * scale,
                );
            }
            LinkKind::P2p => {
                for (from, to) in [(link.a, link.b), (link.b, link.a)] {
                    acc.record(
                        graph.total_degree(from) as u64,
                        graph.total_degree(to) as f64 * scale,
                    );
                }
            }
        }
    }
    if !seen {
        return Err(MetricsError::NoSuchLinks);
    }
    Ok(acc.finish())
}

/// For each degree k, the mean over degree-k nodes of their mean neighbor
/// total degree, all link kinds together.
pub fn avg_neighbor_degree(graph: &AnnotatedGraph) -> Result<BinnedSeries, MetricsError> {
    if graph.node_count() == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    let mut acc = BinAccumulator::default();
    for id in graph.node_ids() {
        let neighbors = graph.neighbors(id);
        if neighbors.is_empty() {
            continue;
        }
        let mean = neighbors
            .iter()
            .map(|&(nb, _)| graph.total_degree(nb) as f64)
            .sum::<f64>()
            / neighbors.len() as f64;
        acc.record(graph.total_degree(id) as u64, mean);
    }
    Ok(acc.finish())
}

/// Local clustering c_i = 2 T_i / (k_i (k_i - 1)) averaged per degree bin.
/// Triangles are counted on the undirected view, ignoring annotations;
/// nodes of degree below 2 are excluded.
pub fn clustering_by_degree(graph: &AnnotatedGraph) -> Result<BinnedSeries, MetricsError> {
    if graph.node_count() == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    let triangles = triangles_per_node(graph);
    let mut acc = BinAccumulator::default();
    for id in graph.node_ids() {
        let k = graph.total_degree(id) as u64;
        if k < 2 {
            continue;
        }
        let c = 2.0 * triangles[id] as f64 / (k * (k - 1)) as f64;
        acc.record(k, c);
    }
    Ok(acc.finish())
}

/// Triangle counts per node. Each edge contributes its common neighbors,
/// so every triangle increments each of its corners exactly once (via the
/// opposite edge).
pub fn triangles_per_node(graph: &AnnotatedGraph) -> Vec<u64> {
    let n = graph.node_count();
    let sets: Vec<HashSet<usize>> = (0..n)
        .map(|id| graph.neighbors(id).iter().map(|&(nb, _)| nb).collect())
        .collect();
    let mut triangles = vec![0u64; n];
    for link in graph.links() {
        let (u, v) = (link.a, link.b);
        let (small, large) = if sets[u].len() <= sets[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        for &w in &sets[small] {
            if w != u && w != v && sets[large].contains(&w) {
                triangles[w] += 1;
            }
        }
    }
    triangles
}

/// Mean local clustering over nodes of degree >= 2; None when no node
/// qualifies.
pub fn mean_clustering(graph: &AnnotatedGraph) -> Option<f64> {
    let series = clustering_by_degree(graph).ok()?;
    let total = series.total_count();
    if total == 0 {
        return None;
    }
    let sum: f64 = series
        .points
        .iter()
        .map(|p| p.mean * p.count as f64)
        .sum();
    Some(sum / total as f64)
}

/// 2 |links| / |nodes|.
pub fn mean_degree(graph: &AnnotatedGraph) -> Result<f64, MetricsError> {
    if graph.node_count() == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    Ok(graph.mean_degree())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    DiscreteMle,
    CcdfRegression,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub gamma_hat: f64,
    pub k_min: u64,
    pub n_tail: usize,
    pub method: FitMethod,
}

const MIN_TAIL: usize = 10;

fn mle_gamma(tail: &[u64], k_min: u64) -> f64 {
    let shift = k_min as f64 - 0.5;
    let log_sum: f64 = tail.iter().map(|&k| (k as f64 / shift).ln()).sum();
    1.0 + tail.len() as f64 / log_sum
}

/// KS distance between the empirical tail CCDF and the fitted
/// ((k - 0.5)/(k_min - 0.5))^(1 - gamma) tail.
fn ks_distance(tail: &[u64], k_min: u64, gamma: f64) -> f64 {
    let n = tail.len() as f64;
    let shift = k_min as f64 - 0.5;
    let mut worst: f64 = 0.0;
    let mut at_or_above = tail.len();
    let mut i = 0;
    while i < tail.len() {
        let k = tail[i];
        let mut j = i;
        while j < tail.len() && tail[j] == k {
            j += 1;
        }
        let emp = at_or_above as f64 / n;
        let model = ((k as f64 - 0.5) / shift).powf(1.0 - gamma);
        worst = worst.max((emp - model).abs());
        at_or_above -= j - i;
        i = j;
    }
    worst
}

/// Estimates the power-law exponent of a discrete sample tail.
///
/// With `k_min` unset, scans candidate cutoffs and keeps the one whose
/// fitted tail minimizes the Kolmogorov-Smirnov distance. Zero-valued
/// samples never enter the tail.
pub fn fit_power_law(
    samples: &[u64],
    k_min: Option<u64>,
    method: FitMethod,
) -> Result<PowerLawFit, MetricsError> {
    let mut sorted: Vec<u64> = samples.iter().copied().filter(|&s| s >= 1).collect();
    sorted.sort_unstable();
    if sorted.len() < MIN_TAIL {
        return Err(MetricsError::InsufficientTail);
    }

    let chosen_k_min = match k_min {
        Some(k) => {
            if k < 1 {
                return Err(MetricsError::InsufficientTail);
            }
            k
        }
        None => scan_k_min(&sorted)?,
    };

    let start = sorted.partition_point(|&s| s < chosen_k_min);
    let tail = &sorted[start..];
    if tail.len() < MIN_TAIL || distinct_count(tail) < 2 {
        return Err(MetricsError::InsufficientTail);
    }

    let gamma_hat = match method {
        FitMethod::DiscreteMle => mle_gamma(tail, chosen_k_min),
        FitMethod::CcdfRegression => regression_gamma(tail),
    };
    if !gamma_hat.is_finite() || gamma_hat <= 1.0 {
        return Err(MetricsError::InsufficientTail);
    }
    Ok(PowerLawFit {
        gamma_hat,
        k_min: chosen_k_min,
        n_tail: tail.len(),
        method,
    })
}

fn distinct_count(sorted: &[u64]) -> usize {
    let mut distinct = 0;
    let mut last = None;
    for &v in sorted {
        if Some(v) != last {
            distinct += 1;
            last = Some(v);
        }
    }
    distinct
}

fn scan_k_min(sorted: &[u64]) -> Result<u64, MetricsError> {
    let mut best: Option<(f64, u64)> = None;
    let mut candidates: Vec<u64> = sorted.to_vec();
    candidates.dedup();
    for &cand in &candidates {
        let start = sorted.partition_point(|&s| s < cand);
        let tail = &sorted[start..];
        if tail.len() < MIN_TAIL || distinct_count(tail) < 2 {
            break; // tails only shrink from here
        }
        let gamma = mle_gamma(tail, cand);
        if !gamma.is_finite() || gamma <= 1.0 {
            continue;
        }
        let ks = ks_distance(tail, cand, gamma);
        if best.map_or(true, |(b, _)| ks < b) {
            best = Some((ks, cand));
        }
    }
    best.map(|(_, k)| k).ok_or(MetricsError::InsufficientTail)
}

/// Least-squares slope of the log-CCDF against log degree; the CCDF of a
/// k^(-gamma) law falls as k^(1 - gamma), so gamma = 1 - slope.
fn regression_gamma(tail: &[u64]) -> f64 {
    let n = tail.len() as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut at_or_above = tail.len();
    let mut i = 0;
    while i < tail.len() {
        let k = tail[i];
        let mut j = i;
        while j < tail.len() && tail[j] == k {
            j += 1;
        }
        xs.push((k as f64).ln());
        ys.push((at_or_above as f64 / n).ln());
        at_or_above -= j - i;
        i = j;
    }
    let slope = least_squares_slope(&xs, &ys);
    1.0 - slope
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// R^2 of a straight-line fit; used for the exponential-shape check on
/// the provider distribution.
pub fn linear_fit_r2(xs: &[f64], ys: &[f64]) -> f64 {
    let slope = least_squares_slope(xs, ys);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if ss_tot == 0.0 {
        return 1.0;
    }
    1.0 - ss_res / ss_tot
}

/// Everything the validation battery needs for one graph: the degree
/// distribution, the three annotated distributions over ISPs, the two
/// ADD projections, both JDD projections (normalized), average neighbor
/// degree, clustering, mean degree, and the exponent fits.
#[derive(Debug, Clone, Serialize)]
pub struct MetricBattery {
    pub dd: CcdfSeries,
    pub ad_customers: CcdfSeries,
    pub ad_providers: CcdfSeries,
    pub ad_peers: CcdfSeries,
    pub add_customers: BinnedSeries,
    pub add_peers: BinnedSeries,
    /// None when the graph has no links of that kind.
    pub jdd_c2p: Option<BinnedSeries>,
    pub jdd_p2p: Option<BinnedSeries>,
    pub avg_neighbor_degree: BinnedSeries,
    pub clustering: BinnedSeries,
    pub mean_degree: f64,
    pub fits: BatteryFits,
}

/// Both exponent estimates for one sample set: the maximum-likelihood fit
/// with a KS-scanned cutoff, and the slope read off the full log-CCDF
/// (cutoff fixed at 1), which is how published exponents are usually
/// quoted. None when the tail is too short to fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitPair {
    pub mle: Option<PowerLawFit>,
    pub regression: Option<PowerLawFit>,
}

impl FitPair {
    pub fn from_samples(samples: &[u64]) -> Self {
        FitPair {
            mle: fit_power_law(samples, None, FitMethod::DiscreteMle).ok(),
            regression: fit_power_law(samples, Some(1), FitMethod::CcdfRegression).ok(),
        }
    }
}

/// Power-law fits for the heavy-tailed members of the battery.
#[derive(Debug, Clone, Serialize)]
pub struct BatteryFits {
    pub dd: FitPair,
    pub ad_customers: FitPair,
    pub ad_peers: FitPair,
}

pub fn metric_battery(graph: &AnnotatedGraph) -> Result<MetricBattery, MetricsError> {
    let isp = Some(NodeClass::Isp);
    let fit = |samples: Vec<u64>| FitPair::from_samples(&samples);
    Ok(MetricBattery {
        dd: degree_ccdf(graph, None)?,
        ad_customers: annotated_ccdf(graph, DegreeKind::Customers, isp)?,
        ad_providers: annotated_ccdf(graph, DegreeKind::Providers, isp)?,
        ad_peers: annotated_ccdf(graph, DegreeKind::Peers, isp)?,
        add_customers: add_binned(graph, DegreeKind::Customers)?,
        add_peers: add_binned(graph, DegreeKind::Peers)?,
        jdd_c2p: jdd_avg_neighbor(graph, LinkKind::C2p, true).ok(),
        jdd_p2p: jdd_avg_neighbor(graph, LinkKind::P2p, true).ok(),
        avg_neighbor_degree: avg_neighbor_degree(graph)?,
        clustering: clustering_by_degree(graph)?,
        mean_degree: mean_degree(graph)?,
        fits: BatteryFits {
            dd: fit(degree_samples(graph, None, None)),
            ad_customers: fit(degree_samples(graph, Some(DegreeKind::Customers), isp)),
            ad_peers: fit(degree_samples(graph, Some(DegreeKind::Peers), isp)),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AnnotatedGraph;

    fn isp_clique(n: usize) -> AnnotatedGraph {
        let mut g = AnnotatedGraph::new();
        for _ in 0..n {
            g.add_node(NodeClass::Isp);
        }
        for a in 0..n {
            for b in (a + 1)..n {
                g.add_p2p(a, b).unwrap();
            }
        }
        g
    }

    fn star(leaves: usize) -> AnnotatedGraph {
        let mut g = AnnotatedGraph::new();
        let hub = g.add_node(NodeClass::Isp);
        for _ in 0..leaves {
            let leaf = g.add_node(NodeClass::NonIsp);
            g.add_c2p(leaf, hub).unwrap();
        }
        g
    }

    #[test]
    fn ccdf_of_two_degree_one_nodes() {
        let g = crate::generator::seed_graph();
        let ccdf = degree_ccdf(&g, None).unwrap();
        assert_eq!(ccdf.points, vec![(1, 1.0)]);
    }

    #[test]
    fn ccdf_of_a_star() {
        let ccdf = degree_ccdf(&star(4), None).unwrap();
        assert_eq!(ccdf.points, vec![(1, 1.0), (4, 0.2)]);
    }

    #[test]
    fn ccdf_is_monotone_and_starts_at_one() {
        let samples = vec![3, 1, 4, 1, 5, 9, 2, 6];
        let ccdf = CcdfSeries::from_samples(&samples).unwrap();
        assert_eq!(ccdf.points[0].1, 1.0);
        for w in ccdf.points.windows(2) {
            assert!(w[0].1 >= w[1].1);
            assert!(w[0].0 < w[1].0);
        }
        assert!(CcdfSeries::from_samples(&[]).is_err());
    }

    #[test]
    fn per_class_ccdfs_partition_the_population() {
        let g = star(4);
        let all = degree_samples(&g, None, None);
        let mut merged = degree_samples(&g, None, Some(NodeClass::Isp));
        merged.extend(degree_samples(&g, None, Some(NodeClass::NonIsp)));
        let mut a = all.clone();
        let mut b = merged.clone();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn annotated_ccdf_without_peering_is_a_point_mass_at_zero() {
        let g = star(3);
        let ccdf = annotated_ccdf(&g, DegreeKind::Peers, Some(NodeClass::Isp)).unwrap();
        assert_eq!(ccdf.points, vec![(0, 1.0)]);
    }

    #[test]
    fn add_binned_weighted_mean_identity() {
        // ISPs with varying provider/customer mixes
        let mut g = AnnotatedGraph::new();
        for _ in 0..6 {
            g.add_node(NodeClass::Isp);
        }
        g.add_c2p(1, 0).unwrap();
        g.add_c2p(2, 0).unwrap();
        g.add_c2p(2, 1).unwrap();
        g.add_c2p(3, 2).unwrap();
        g.add_c2p(4, 2).unwrap();
        g.add_c2p(5, 4).unwrap();
        let series = add_binned(&g, DegreeKind::Customers).unwrap();
        let isps = g.class_count(NodeClass::Isp) as u64;
        assert_eq!(series.total_count(), isps);
        let weighted: f64 = series
            .points
            .iter()
            .map(|p| p.mean * p.count as f64)
            .sum::<f64>()
            / isps as f64;
        let direct = class_nodes(&g, Some(NodeClass::Isp))
            .map(|id| degree_of(&g, id, DegreeKind::Customers) as f64)
            .sum::<f64>()
            / isps as f64;
        assert!((weighted - direct).abs() < 1e-12);
    }

    #[test]
    fn single_provider_bin_when_uniform() {
        let mut g = AnnotatedGraph::new();
        for _ in 0..4 {
            g.add_node(NodeClass::Isp);
        }
        g.add_c2p(1, 0).unwrap();
        g.add_c2p(2, 0).unwrap();
        g.add_c2p(3, 0).unwrap();
        // every ISP except the root has exactly one provider
        let series = add_binned(&g, DegreeKind::Customers).unwrap();
        let one_bin: Vec<_> = series.points.iter().filter(|p| p.key == 1.0).collect();
        assert_eq!(one_bin.len(), 1);
        assert_eq!(one_bin[0].count, 3);
    }

    #[test]
    fn jdd_on_a_full_mesh_is_n_minus_one() {
        for n in [3usize, 7, 20] {
            let g = isp_clique(n);
            let series = jdd_avg_neighbor(&g, LinkKind::P2p, false).unwrap();
            assert_eq!(series.points.len(), 1);
            assert!((series.points[0].mean - (n as f64 - 1.0)).abs() < 1e-12);
            let norm = jdd_avg_neighbor(&g, LinkKind::P2p, true).unwrap();
            assert!((norm.points[0].mean - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jdd_single_c2p_link() {
        let mut g = AnnotatedGraph::new();
        g.add_node(NodeClass::Isp);
        g.add_node(NodeClass::Isp);
        g.add_c2p(1, 0).unwrap();
        let series = jdd_avg_neighbor(&g, LinkKind::C2p, false).unwrap();
        assert_eq!(series.points.len(), 1);
        assert_eq!(series.points[0].key, 1.0);
        assert_eq!(series.points[0].mean, 1.0);
        assert_eq!(
            jdd_avg_neighbor(&g, LinkKind::P2p, false),
            Err(MetricsError::NoSuchLinks)
        );
    }

    #[test]
    fn avg_neighbor_degree_on_small_shapes() {
        // star: leaves see the hub (degree 4), the hub sees degree-1 leaves
        let series = avg_neighbor_degree(&star(4)).unwrap();
        let by_key: BTreeMap<u64, f64> = series
            .points
            .iter()
            .map(|p| (p.key as u64, p.mean))
            .collect();
        assert_eq!(by_key[&1], 4.0);
        assert_eq!(by_key[&4], 1.0);

        // path of 3: endpoints see the middle (degree 2), middle sees 1s
        let mut path = AnnotatedGraph::new();
        for _ in 0..3 {
            path.add_node(NodeClass::Isp);
        }
        path.add_p2p(0, 1).unwrap();
        path.add_p2p(1, 2).unwrap();
        let series = avg_neighbor_degree(&path).unwrap();
        let by_key: BTreeMap<u64, f64> = series
            .points
            .iter()
            .map(|p| (p.key as u64, p.mean))
            .collect();
        assert_eq!(by_key[&1], 2.0);
        assert_eq!(by_key[&2], 1.0);

        // full mesh: constant n - 1
        let series = avg_neighbor_degree(&isp_clique(6)).unwrap();
        assert_eq!(series.points.len(), 1);
        assert_eq!(series.points[0].mean, 5.0);
    }

    #[test]
    fn clustering_on_canonical_graphs() {
        // triangle: everyone fully clustered
        let series = clustering_by_degree(&isp_clique(3)).unwrap();
        assert_eq!(series.points.len(), 1);
        assert_eq!(series.points[0].mean, 1.0);

        // trees have no triangles
        let series = clustering_by_degree(&star(5)).unwrap();
        for p in &series.points {
            assert_eq!(p.mean, 0.0);
        }

        // K4 minus one edge: the two degree-3 nodes have c = 2/3,
        // the two degree-2 nodes have c = 1
        let mut g = AnnotatedGraph::new();
        for _ in 0..4 {
            g.add_node(NodeClass::Isp);
        }
        for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)] {
            g.add_p2p(a, b).unwrap();
        }
        let series = clustering_by_degree(&g).unwrap();
        let by_key: BTreeMap<u64, f64> = series
            .points
            .iter()
            .map(|p| (p.key as u64, p.mean))
            .collect();
        assert!((by_key[&3] - 2.0 / 3.0).abs() < 1e-12);
        assert!((by_key[&2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degree_one_nodes_are_excluded_from_clustering() {
        let g = star(5);
        let series = clustering_by_degree(&g).unwrap();
        // only the hub qualifies
        assert_eq!(series.total_count(), 1);
    }

    #[test]
    fn mean_degree_values() {
        assert_eq!(mean_degree(&isp_clique(3)).unwrap(), 2.0);
        assert_eq!(mean_degree(&crate::generator::seed_graph()).unwrap(), 1.0);
        assert_eq!(
            mean_degree(&AnnotatedGraph::new()),
            Err(MetricsError::EmptyGraph)
        );
    }

    #[test]
    fn degenerate_samples_cannot_be_fitted() {
        let flat = vec![7u64; 100];
        assert!(fit_power_law(&flat, None, FitMethod::DiscreteMle).is_err());
        assert!(fit_power_law(&[1, 2, 3], None, FitMethod::DiscreteMle).is_err());
    }

    #[test]
    fn log_bins_kick_in_above_sixteen() {
        assert_eq!(bin_index(16), 16);
        assert_eq!(bin_index(17), bin_index(31));
        assert_ne!(bin_index(31), bin_index(32));
        assert_eq!(bin_key(bin_index(40)), (32 + 63) as f64 / 2.0);
        // indices stay ordered
        let mut last = 0;
        for k in 1..10_000u64 {
            assert!(bin_index(k) >= last);
            last = bin_index(k);
        }
    }
}
