//! Composite bridge score: a weighted sum of the three normalized centrality
//! components, used to rank channels as intervention targets.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::graph::ForwardGraph;
use crate::metrics::{compute_metrics, MetricParams, MetricsTable, NodeMetrics};

/// Weights for the in-degree, eigenvector, and clustering components.
/// Grid search uses integer values in `[1, 10]`; manual scoring accepts any
/// positive reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightTriple {
    pub indegree: f64,
    pub eigenvector: f64,
    pub clustering: f64,
}

impl WeightTriple {
    pub fn new(indegree: f64, eigenvector: f64, clustering: f64) -> Self {
        Self {
            indegree,
            eigenvector,
            clustering,
        }
    }
}

/// The weight combination that maximized density disruption in the grid
/// search: `(10, 7, 7)`.
pub fn default_weights() -> WeightTriple {
    WeightTriple::new(10.0, 7.0, 7.0)
}

/// `w_i * indegree_norm + w_e * eigenvector_norm + w_c * clustering_norm`.
pub fn bridge_score(m: &NodeMetrics, w: &WeightTriple) -> Result<f64> {
    let i = m.indegree_norm.ok_or(Error::MissingMetric("indegree_norm"))?;
    let e = m
        .eigenvector_norm
        .ok_or(Error::MissingMetric("eigenvector_norm"))?;
    let c = m
        .clustering_norm
        .ok_or(Error::MissingMetric("clustering_norm"))?;
    Ok(w.indegree * i + w.eigenvector * e + w.clustering * c)
}

/// One row of a bridge ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedNode {
    pub id: String,
    pub clustering_norm: f64,
    pub indegree_norm: f64,
    pub eigenvector_norm: f64,
    pub score: f64,
}

/// Channels ordered by descending bridge score, ties broken by id ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeRanking {
    pub weights: WeightTriple,
    pub entries: Vec<RankedNode>,
}

/// Scores every node of a metrics table and returns `(index, score)` sorted
/// descending by score with ascending-id tie-break.
pub fn rank_table(table: &MetricsTable, w: &WeightTriple) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = (0..table.len())
        .map(|i| {
            (
                i,
                w.indegree * table.indegree_norm[i]
                    + w.eigenvector * table.eigenvector_norm[i]
                    + w.clustering * table.clustering_norm[i],
            )
        })
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| table.ids[a.0].cmp(&table.ids[b.0]))
    });
    scored
}

/// Computes all three metrics on the graph, normalizes over the full node
/// population, scores under `w`, and sorts.
pub fn rank(g: &ForwardGraph, w: &WeightTriple, params: &MetricParams) -> Result<BridgeRanking> {
    if g.node_count() == 0 {
        return Err(Error::UndefinedMetric(
            "ranking requires a non-empty graph".to_string(),
        ));
    }
    let table = compute_metrics(g, params)?;
    let entries = rank_table(&table, w)
        .into_iter()
        .map(|(i, score)| RankedNode {
            id: table.ids[i].clone(),
            clustering_norm: table.clustering_norm[i],
            indegree_norm: table.indegree_norm[i],
            eigenvector_norm: table.eigenvector_norm[i],
            score,
        })
        .collect();
    Ok(BridgeRanking {
        weights: *w,
        entries,
    })
}

impl BridgeRanking {
    /// Writes `channel,clustering_norm,indegree_norm,eigenvector_norm,bridge_score`
    /// in rank order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "channel",
            "clustering_norm",
            "indegree_norm",
            "eigenvector_norm",
            "bridge_score",
        ])?;
        for e in &self.entries {
            wtr.write_record([
                e.id.clone(),
                e.clustering_norm.to_string(),
                e.indegree_norm.to_string(),
                e.eigenvector_norm.to_string(),
                e.score.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Parses a ranking CSV back into entries (weights are not stored in the
    /// file and must be supplied).
    pub fn read_csv<R: Read>(r: R, weights: WeightTriple) -> Result<BridgeRanking> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        let pos = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn {
                    file: "ranking CSV".to_string(),
                    column: name.to_string(),
                })
        };
        let (id_c, cl_c, in_c, ei_c, sc_c) = (
            pos("channel")?,
            pos("clustering_norm")?,
            pos("indegree_norm")?,
            pos("eigenvector_norm")?,
            pos("bridge_score")?,
        );
        let mut entries = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parse = |col: usize, name: &str| -> Result<f64> {
                record
                    .get(col)
                    .unwrap_or("")
                    .parse()
                    .map_err(|_| Error::Parse(format!("ranking row {}: bad {name}", line + 2)))
            };
            entries.push(RankedNode {
                id: record.get(id_c).unwrap_or("").to_string(),
                clustering_norm: parse(cl_c, "clustering_norm")?,
                indegree_norm: parse(in_c, "indegree_norm")?,
                eigenvector_norm: parse(ei_c, "eigenvector_norm")?,
                score: parse(sc_c, "bridge_score")?,
            });
        }
        Ok(BridgeRanking { weights, entries })
    }
}
