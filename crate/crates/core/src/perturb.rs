//! Node-removal perturbation analysis: how much does deleting a candidate
//! target set disrupt the network? Includes the exhaustive weight grid
//! search, the per-channel top-k frequency table, and the comparative
//! single-metric removal table.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use rayon::prelude::*;

use crate::bridge::{default_weights, rank_table, WeightTriple};
use crate::community::louvain;
use crate::error::{Error, Result};
use crate::graph::ForwardGraph;
use crate::metrics::{compute_metrics, MetricParams, MetricsTable};

/// A graph with the requested nodes (and their incident edges) removed, plus
/// the ids that were requested but not present.
#[derive(Debug, Clone)]
pub struct RemovalResult {
    pub graph: ForwardGraph,
    pub missing: Vec<String>,
}

/// Builds a new graph without the listed nodes. Ids absent from the graph are
/// collected into `missing` rather than treated as errors. The input graph is
/// untouched.
pub fn remove_nodes(g: &ForwardGraph, targets: &[String]) -> Result<RemovalResult> {
    let mut drop_idx: HashSet<usize> = HashSet::new();
    let mut missing = Vec::new();
    for raw in targets {
        match g.node_idx(raw) {
            Some(idx) => {
                drop_idx.insert(idx);
            }
            None => missing.push(raw.clone()),
        }
    }
    let mut out = ForwardGraph::new();
    for idx in 0..g.node_count() {
        if drop_idx.contains(&idx) {
            continue;
        }
        out.add_node(g.label(idx))?;
        if g.is_seed(idx) {
            out.mark_seed(g.id(idx))?;
        }
    }
    for (s, t, w) in g.edges() {
        if drop_idx.contains(&s) || drop_idx.contains(&t) {
            continue;
        }
        out.add_edge_with_weight(g.id(s), g.id(t), w)?;
    }
    Ok(RemovalResult {
        graph: out,
        missing,
    })
}

/// Before/after structure metrics for one removal experiment.
///
/// `delta_density = density_before - density_after` always holds exactly.
/// Path length and community count are `None` when undefined on the perturbed
/// graph (no reachable pair / no edges left).
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub removed: Vec<String>,
    pub missing: Vec<String>,
    pub density_before: f64,
    pub density_after: f64,
    pub delta_density: f64,
    pub avg_path_before: Option<f64>,
    pub avg_path_after: Option<f64>,
    pub communities_before: Option<usize>,
    pub communities_after: Option<usize>,
    pub resolution: f64,
    pub seed: u64,
}

fn structure_metrics(
    g: &ForwardGraph,
    resolution: f64,
    seed: u64,
) -> Result<(f64, Option<f64>, Option<usize>)> {
    let density = g.density()?;
    let avg_path = match g.average_path_length() {
        Ok(v) => Some(v),
        Err(Error::UndefinedMetric(_)) => None,
        Err(e) => return Err(e),
    };
    let communities = match louvain(g, resolution, seed) {
        Ok(p) => Some(p.community_count),
        Err(Error::UndefinedMetric(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((density, avg_path, communities))
}

/// Removes `targets` and reports density, average path length, and community
/// count before and after, both sides computed with the same resolution and
/// seed.
pub fn perturbation_report(
    g: &ForwardGraph,
    targets: &[String],
    resolution: f64,
    seed: u64,
) -> Result<PerturbationReport> {
    let removal = remove_nodes(g, targets)?;
    if removal.graph.node_count() < 2 {
        return Err(Error::InvalidArgument(format!(
            "perturbed graph must retain at least 2 nodes, has {}",
            removal.graph.node_count()
        )));
    }
    let (density_before, avg_path_before, communities_before) =
        structure_metrics(g, resolution, seed)?;
    let (density_after, avg_path_after, communities_after) =
        structure_metrics(&removal.graph, resolution, seed)?;
    let mut seen = HashSet::new();
    let removed: Vec<String> = targets
        .iter()
        .filter(|t| !removal.missing.contains(t) && seen.insert(t.as_str().to_string()))
        .cloned()
        .collect();
    Ok(PerturbationReport {
        removed,
        missing: removal.missing,
        density_before,
        density_after,
        delta_density: density_before - density_after,
        avg_path_before,
        avg_path_after,
        communities_before,
        communities_after,
        resolution,
        seed,
    })
}

/// Result of evaluating one weight combination.
#[derive(Debug, Clone, PartialEq)]
pub struct GridEntry {
    pub weights: WeightTriple,
    pub delta_density: f64,
    pub top_nodes: Vec<String>,
}

/// Full sweep over the integer weight cube.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub entries: Vec<GridEntry>,
    /// Triple with the largest delta; ties resolve to the lexicographically
    /// smallest `(w_i, w_e, w_c)`.
    pub best: WeightTriple,
    pub k: usize,
    pub density_before: f64,
}

/// Evaluates every integer triple in `[lo, hi]^3`: score all nodes, remove the
/// top `k`, record the density drop. The three metrics are computed once on
/// the intact graph and reused for every triple; only the linear combination
/// varies.
pub fn grid_search(
    g: &ForwardGraph,
    k: usize,
    lo: u32,
    hi: u32,
    params: &MetricParams,
) -> Result<GridSearchResult> {
    if lo < 1 || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "weight range must satisfy 1 <= lo <= hi, got {lo}..{hi}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".to_string()));
    }
    if g.node_count() < k + 2 {
        return Err(Error::InvalidArgument(format!(
            "removing k={k} of {} nodes leaves fewer than 2",
            g.node_count()
        )));
    }
    let table = compute_metrics(g, params)?;
    let density_before = g.density()?;
    let mut triples = Vec::new();
    for wi in lo..=hi {
        for we in lo..=hi {
            for wc in lo..=hi {
                triples.push(WeightTriple::new(f64::from(wi), f64::from(we), f64::from(wc)));
            }
        }
    }
    let entries: Vec<GridEntry> = triples
        .par_iter()
        .map(|w| evaluate_triple(g, &table, w, k, density_before))
        .collect::<Result<Vec<_>>>()?;
    let best = entries
        .iter()
        .reduce(|best, e| if e.delta_density > best.delta_density { e } else { best })
        .expect("grid is non-empty")
        .weights;
    Ok(GridSearchResult {
        entries,
        best,
        k,
        density_before,
    })
}

fn evaluate_triple(
    g: &ForwardGraph,
    table: &MetricsTable,
    w: &WeightTriple,
    k: usize,
    density_before: f64,
) -> Result<GridEntry> {
    let ranked = rank_table(table, w);
    let top_nodes: Vec<String> = ranked
        .iter()
        .take(k)
        .map(|&(i, _)| table.ids[i].clone())
        .collect();
    let removal = remove_nodes(g, &top_nodes)?;
    let density_after = removal.graph.density()?;
    Ok(GridEntry {
        weights: *w,
        delta_density: density_before - density_after,
        top_nodes,
    })
}

/// How often each channel appeared in the top-k across the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTable {
    pub counts: BTreeMap<String, u64>,
    pub grid_size: usize,
    pub k: usize,
}

pub fn frequency_analysis(result: &GridSearchResult) -> FrequencyTable {
    let mut counts = BTreeMap::new();
    for entry in &result.entries {
        for id in &entry.top_nodes {
            *counts.entry(id.clone()).or_insert(0) += 1;
        }
    }
    FrequencyTable {
        counts,
        grid_size: result.entries.len(),
        k: result.k,
    }
}

/// One row of the comparative disruption table: which nodes a single ranking
/// basis selects, and the network metrics after removing them.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparativeRow {
    pub basis: &'static str,
    pub removed: Vec<String>,
    pub avg_path_after: Option<f64>,
    pub communities_after: Option<usize>,
    pub density_after: f64,
}

/// Removal bases for the comparative table, in output order.
const COMPARATIVE_BASES: [&str; 4] = ["indegree", "eigenvector", "clustering", "bridge_score"];

/// Compares bridge-score targeting against each single-metric ranking:
/// top-k by raw in-degree (descending), by eigenvector (descending), by
/// clustering coefficient (ascending, low-clustering nodes bridge), and by
/// bridge score under the default weights.
pub fn comparative_analysis(
    g: &ForwardGraph,
    k: usize,
    resolution: f64,
    seed: u64,
    params: &MetricParams,
) -> Result<Vec<ComparativeRow>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".to_string()));
    }
    if g.node_count() < k + 2 {
        return Err(Error::InvalidArgument(format!(
            "removing k={k} of {} nodes leaves fewer than 2",
            g.node_count()
        )));
    }
    let table = compute_metrics(g, params)?;
    let mut rows = Vec::new();
    for basis in COMPARATIVE_BASES {
        let order = match basis {
            "indegree" => order_by(&table, |i| table.indegree[i] as f64, true),
            "eigenvector" => order_by(&table, |i| table.eigenvector[i], true),
            "clustering" => order_by(&table, |i| table.clustering[i], false),
            _ => rank_table(&table, &default_weights())
                .into_iter()
                .map(|(i, _)| i)
                .collect(),
        };
        let removed: Vec<String> = order.iter().take(k).map(|&i| table.ids[i].clone()).collect();
        let removal = remove_nodes(g, &removed)?;
        let density_after = removal.graph.density()?;
        let avg_path_after = match removal.graph.average_path_length() {
            Ok(v) => Some(v),
            Err(Error::UndefinedMetric(_)) => None,
            Err(e) => return Err(e),
        };
        let communities_after = match louvain(&removal.graph, resolution, seed) {
            Ok(p) => Some(p.community_count),
            Err(Error::UndefinedMetric(_)) => None,
            Err(e) => return Err(e),
        };
        rows.push(ComparativeRow {
            basis,
            removed,
            avg_path_after,
            communities_after,
            density_after,
        });
    }
    Ok(rows)
}

fn order_by(table: &MetricsTable, key: impl Fn(usize) -> f64, descending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..table.len()).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (key(a), key(b));
        let cmp = if descending {
            kb.partial_cmp(&ka)
        } else {
            ka.partial_cmp(&kb)
        };
        cmp.unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| table.ids[a].cmp(&table.ids[b]))
    });
    order
}

fn join_nodes(nodes: &[String]) -> String {
    nodes.join(";")
}

impl GridSearchResult {
    /// Writes `w_i,w_e,w_c,delta_density,top_nodes` with the member list
    /// semicolon-joined, one row per triple in grid order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["w_i", "w_e", "w_c", "delta_density", "top_nodes"])?;
        for e in &self.entries {
            wtr.write_record([
                e.weights.indegree.to_string(),
                e.weights.eigenvector.to_string(),
                e.weights.clustering.to_string(),
                e.delta_density.to_string(),
                join_nodes(&e.top_nodes),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

impl FrequencyTable {
    /// Writes `channel,count` sorted by count descending, id ascending.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["channel", "count"])?;
        let mut rows: Vec<(&String, &u64)> = self.counts.iter().collect();
        rows.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        for (id, count) in rows {
            wtr.write_record([id.clone(), count.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

impl PerturbationReport {
    /// Writes a one-row CSV mirroring the report fields.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "removed",
            "density_before",
            "density_after",
            "delta_density",
            "avg_path_before",
            "avg_path_after",
            "communities_before",
            "communities_after",
            "resolution",
            "seed",
        ])?;
        let opt_f = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        let opt_u = |v: Option<usize>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        wtr.write_record([
            join_nodes(&self.removed),
            self.density_before.to_string(),
            self.density_after.to_string(),
            self.delta_density.to_string(),
            opt_f(self.avg_path_before),
            opt_f(self.avg_path_after),
            opt_u(self.communities_before),
            opt_u(self.communities_after),
            self.resolution.to_string(),
            self.seed.to_string(),
        ])?;
        wtr.flush()?;
        Ok(())
    }
}

/// Writes the comparative table as CSV:
/// `metric,top_channels,avg_path_length,communities,density`.
pub fn write_comparative_csv<W: Write>(rows: &[ComparativeRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "metric",
        "top_channels",
        "avg_path_length",
        "communities",
        "density",
    ])?;
    for row in rows {
        wtr.write_record([
            row.basis.to_string(),
            join_nodes(&row.removed),
            row.avg_path_after
                .map_or_else(|| "NA".to_string(), |v| v.to_string()),
            row.communities_after
                .map_or_else(|| "NA".to_string(), |v| v.to_string()),
            row.density_after.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
