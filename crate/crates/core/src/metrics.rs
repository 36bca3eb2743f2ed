//! Per-node centrality components of the bridge score: in-degree centrality,
//! eigenvector centrality, local clustering coefficient, and the min-max
//! normalization that makes them comparable.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::graph::ForwardGraph;

/// Knobs for the eigenvector power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    /// Successive-iterate L-infinity difference below which iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Uniform teleport mass added each step so the iteration converges on
    /// graphs that are not strongly connected. `0.0` recovers the pure power
    /// method.
    pub damping: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 1000,
            damping: 0.15,
        }
    }
}

/// In-degree of every node: the count of distinct in-neighbors, weights
/// ignored. Indexed by node index.
pub fn indegree_centrality(g: &ForwardGraph) -> Vec<u64> {
    (0..g.node_count()).map(|v| g.in_degree(v) as u64).collect()
}

/// Eigenvector centrality on the in-edge orientation: a node's score is
/// proportional to the sum of the scores of the channels forwarding into it.
///
/// Power iteration starts from the uniform positive vector, renormalizing to
/// unit L2 norm each step. With damping `d > 0` the update is
/// `z_v = x_v + sum_{u -> v} x_u; y = (1 - d) * z + (d / n) * sum(z)`:
/// a fraction `d` of the delivered mass teleports uniformly. The iteration
/// matrix is then strictly positive, so a unique positive dominant
/// eigenvector exists for any graph; the self term keeps the iteration
/// aperiodic even on bipartite-like forwarding structures, where the plain
/// teleport is too weak to break the +/- eigenvalue symmetry. With `d = 0`
/// the update is the pure method `y = A^T x`.
pub fn eigenvector_centrality(g: &ForwardGraph, params: &MetricParams) -> Result<Vec<f64>> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::UndefinedMetric(
            "eigenvector centrality requires a non-empty graph".to_string(),
        ));
    }
    if params.tolerance <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eigenvector tolerance must be positive, got {}",
            params.tolerance
        )));
    }
    if !(0.0..1.0).contains(&params.damping) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in [0, 1), got {}",
            params.damping
        )));
    }
    let damped = params.damping > 0.0;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iterations {
        for (v, yv) in y.iter_mut().enumerate() {
            let inflow: f64 = g.in_edges(v).map(|(u, _)| x[u]).sum();
            *yv = if damped { inflow + x[v] } else { inflow };
        }
        if damped {
            let teleport = params.damping * y.iter().sum::<f64>() / n as f64;
            for yv in y.iter_mut() {
                *yv = (1.0 - params.damping) * *yv + teleport;
            }
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            // Possible only without damping, e.g. on a DAG where mass dies out.
            return Err(Error::NotConverged {
                iterations: 0,
                residual: f64::INFINITY,
                tolerance: params.tolerance,
            });
        }
        residual = 0.0f64;
        for (xi, yi) in x.iter_mut().zip(y.iter()) {
            let next = yi / norm;
            residual = residual.max((next - *xi).abs());
            *xi = next;
        }
        if residual < params.tolerance {
            return Ok(x);
        }
    }
    Err(Error::NotConverged {
        iterations: params.max_iterations,
        residual,
        tolerance: params.tolerance,
    })
}

/// Local clustering coefficient on the undirected projection:
/// `c(v) = 2 T(v) / (k(v) (k(v) - 1))` with `k(v)` the number of distinct
/// undirected neighbors and `T(v)` the number of undirected edges among them.
/// Nodes with fewer than two neighbors get 0.
pub fn local_clustering(g: &ForwardGraph) -> Vec<f64> {
    let n = g.node_count();
    let mut neighbors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (s, t, _) in g.edges() {
        neighbors[s].insert(t);
        neighbors[t].insert(s);
    }
    (0..n)
        .map(|v| {
            let nv = &neighbors[v];
            let k = nv.len();
            if k < 2 {
                return 0.0;
            }
            let mut triangles = 0u64;
            for &a in nv {
                for &b in nv.range((std::ops::Bound::Excluded(a), std::ops::Bound::Unbounded)) {
                    if neighbors[a].contains(&b) {
                        triangles += 1;
                    }
                }
            }
            2.0 * triangles as f64 / (k as f64 * (k as f64 - 1.0))
        })
        .collect()
}

/// Min-max normalization `(x - min) / (max - min)` per entry. When the range
/// is degenerate (`max == min`) every output is 0 so a constant column adds no
/// discrimination downstream.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let Some(min) = values.iter().copied().reduce(f64::min) else {
        return Vec::new();
    };
    let max = values.iter().copied().reduce(f64::max).unwrap();
    if max == min {
        return vec![0.0; values.len()];
    }
    values.iter().map(|&v| (v - min) / (max - min)).collect()
}

/// Raw and normalized metric triple for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetrics {
    pub indegree: u64,
    pub eigenvector: f64,
    pub clustering: f64,
    pub indegree_norm: Option<f64>,
    pub eigenvector_norm: Option<f64>,
    pub clustering_norm: Option<f64>,
}

impl NodeMetrics {
    /// Builds a metrics value directly from normalized components, e.g. when
    /// re-scoring rows of a published ranking table.
    pub fn from_normalized(indegree_norm: f64, eigenvector_norm: f64, clustering_norm: f64) -> Self {
        Self {
            indegree: 0,
            eigenvector: 0.0,
            clustering: 0.0,
            indegree_norm: Some(indegree_norm),
            eigenvector_norm: Some(eigenvector_norm),
            clustering_norm: Some(clustering_norm),
        }
    }
}

/// All three metrics for every node of a graph, raw and normalized, aligned
/// with node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub ids: Vec<String>,
    pub indegree: Vec<u64>,
    pub eigenvector: Vec<f64>,
    pub clustering: Vec<f64>,
    pub indegree_norm: Vec<f64>,
    pub eigenvector_norm: Vec<f64>,
    pub clustering_norm: Vec<f64>,
}

/// Computes in-degree, eigenvector, and clustering for every node and
/// normalizes each column over the full node population.
pub fn compute_metrics(g: &ForwardGraph, params: &MetricParams) -> Result<MetricsTable> {
    let indegree = indegree_centrality(g);
    let eigenvector = eigenvector_centrality(g, params)?;
    let clustering = local_clustering(g);
    let indegree_f: Vec<f64> = indegree.iter().map(|&d| d as f64).collect();
    Ok(MetricsTable {
        ids: g.node_ids().map(str::to_string).collect(),
        indegree_norm: min_max_normalize(&indegree_f),
        eigenvector_norm: min_max_normalize(&eigenvector),
        clustering_norm: min_max_normalize(&clustering),
        indegree,
        eigenvector,
        clustering,
    })
}

impl MetricsTable {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn node_metrics(&self, idx: usize) -> NodeMetrics {
        NodeMetrics {
            indegree: self.indegree[idx],
            eigenvector: self.eigenvector[idx],
            clustering: self.clustering[idx],
            indegree_norm: Some(self.indegree_norm[idx]),
            eigenvector_norm: Some(self.eigenvector_norm[idx]),
            clustering_norm: Some(self.clustering_norm[idx]),
        }
    }

    /// Writes `channel,indegree,indegree_norm,eigenvector,eigenvector_norm,clustering,clustering_norm`,
    /// rows sorted by channel id.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "channel",
            "indegree",
            "indegree_norm",
            "eigenvector",
            "eigenvector_norm",
            "clustering",
            "clustering_norm",
        ])?;
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.ids[a].cmp(&self.ids[b]));
        for i in order {
            wtr.write_record([
                self.ids[i].clone(),
                self.indegree[i].to_string(),
                self.indegree_norm[i].to_string(),
                self.eigenvector[i].to_string(),
                self.eigenvector_norm[i].to_string(),
                self.clustering[i].to_string(),
                self.clustering_norm[i].to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Parses a CSV produced by [`MetricsTable::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<MetricsTable> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        let expect = [
            "channel",
            "indegree",
            "indegree_norm",
            "eigenvector",
            "eigenvector_norm",
            "clustering",
            "clustering_norm",
        ];
        for col in expect {
            if !headers.iter().any(|h| h == col) {
                return Err(Error::MissingColumn {
                    file: "metrics CSV".to_string(),
                    column: col.to_string(),
                });
            }
        }
        let pos = |name: &str| headers.iter().position(|h| h == name).unwrap();
        let mut t = MetricsTable {
            ids: Vec::new(),
            indegree: Vec::new(),
            eigenvector: Vec::new(),
            clustering: Vec::new(),
            indegree_norm: Vec::new(),
            eigenvector_norm: Vec::new(),
            clustering_norm: Vec::new(),
        };
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let field = |name: &str| record.get(pos(name)).unwrap_or("").to_string();
            let parse_f = |name: &str| -> Result<f64> {
                field(name)
                    .parse()
                    .map_err(|_| Error::Parse(format!("metrics row {}: bad {name}", line + 2)))
            };
            t.ids.push(field("channel"));
            t.indegree.push(field("indegree").parse().map_err(|_| {
                Error::Parse(format!("metrics row {}: bad indegree", line + 2))
            })?);
            t.indegree_norm.push(parse_f("indegree_norm")?);
            t.eigenvector.push(parse_f("eigenvector")?);
            t.eigenvector_norm.push(parse_f("eigenvector_norm")?);
            t.clustering.push(parse_f("clustering")?);
            t.clustering_norm.push(parse_f("clustering_norm")?);
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_from(edges: &[(&str, &str)]) -> ForwardGraph {
        let mut g = ForwardGraph::new();
        for (s, t) in edges {
            g.add_edge(s, t).unwrap();
        }
        g
    }

    #[test]
    fn indegree_star() {
        let g = graph_from(&[("l1", "hub"), ("l2", "hub"), ("l3", "hub"), ("l4", "hub")]);
        let deg = indegree_centrality(&g);
        let hub = g.node_idx("hub").unwrap();
        assert_eq!(deg[hub], 4);
        for leaf in ["l1", "l2", "l3", "l4"] {
            assert_eq!(deg[g.node_idx(leaf).unwrap()], 0);
        }
    }

    #[test]
    fn indegree_cycle_is_uniform() {
        let g = graph_from(&[("a", "b"), ("b", "c"), ("c", "a")]);
        assert_eq!(indegree_centrality(&g), vec![1, 1, 1]);
    }

    #[test]
    fn indegree_counts_pairs_not_weights() {
        let g = graph_from(&[("a", "b"), ("a", "b"), ("c", "b")]);
        let b = g.node_idx("b").unwrap();
        assert_eq!(indegree_centrality(&g)[b], 2);
    }

    #[test]
    fn eigenvector_cycle_is_uniform() {
        let g = graph_from(&[("a", "b"), ("b", "c"), ("c", "a")]);
        let x = eigenvector_centrality(&g, &MetricParams::default()).unwrap();
        for v in &x {
            assert!((v - x[0]).abs() < 1e-9);
        }
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvector_flows_along_forward_direction() {
        let g = graph_from(&[("a", "b")]);
        let x = eigenvector_centrality(&g, &MetricParams::default()).unwrap();
        let a = g.node_idx("a").unwrap();
        let b = g.node_idx("b").unwrap();
        assert!(x[b] > x[a]);
    }

    #[test]
    fn eigenvector_without_damping_fails_on_dag_sink() {
        // Mass drains to the sink, then dies: the pure method cannot settle.
        let g = graph_from(&[("a", "b"), ("b", "c")]);
        let params = MetricParams {
            damping: 0.0,
            max_iterations: 50,
            ..MetricParams::default()
        };
        assert!(matches!(
            eigenvector_centrality(&g, &params),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn eigenvector_reports_nonconvergence_budget() {
        let g = graph_from(&[("a", "b"), ("b", "a"), ("b", "c"), ("c", "a")]);
        let params = MetricParams {
            max_iterations: 1,
            ..MetricParams::default()
        };
        match eigenvector_centrality(&g, &params) {
            Err(Error::NotConverged {
                iterations,
                residual,
                ..
            }) => {
                assert_eq!(iterations, 1);
                assert!(residual.is_finite());
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn clustering_triangle_is_one() {
        let g = graph_from(&[("a", "b"), ("b", "c"), ("a", "c")]);
        assert_eq!(local_clustering(&g), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn clustering_star_center_is_zero() {
        let g = graph_from(&[("l1", "hub"), ("l2", "hub"), ("l3", "hub"), ("l4", "hub")]);
        let hub = g.node_idx("hub").unwrap();
        assert_eq!(local_clustering(&g)[hub], 0.0);
    }

    #[test]
    fn clustering_ignores_direction_and_multiplicity() {
        // a<->b plus b->c, c->a in one direction each still closes a triangle.
        let g = graph_from(&[("a", "b"), ("b", "a"), ("b", "c"), ("c", "a"), ("c", "a")]);
        assert_eq!(local_clustering(&g), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn min_max_affine_example() {
        assert_eq!(min_max_normalize(&[2.0, 4.0, 6.0]), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn min_max_degenerate_range_is_all_zero() {
        assert_eq!(min_max_normalize(&[3.0, 3.0, 3.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn min_max_extremes_hit_exactly() {
        let normed = min_max_normalize(&[10.0, 7.5, -2.0, 4.0]);
        assert_eq!(normed[0], 1.0);
        assert_eq!(normed[2], 0.0);
    }

    #[test]
    fn metrics_csv_round_trip() {
        let g = graph_from(&[("a", "b"), ("b", "c"), ("c", "a"), ("a", "c")]);
        let table = compute_metrics(&g, &MetricParams::default()).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let back = MetricsTable::read_csv(buf.as_slice()).unwrap();
        // The CSV is sorted by channel id; compare as sorted maps.
        let mut expect: Vec<usize> = (0..table.len()).collect();
        expect.sort_by(|&x, &y| table.ids[x].cmp(&table.ids[y]));
        for (row, &i) in expect.iter().enumerate() {
            assert_eq!(back.ids[row], table.ids[i]);
            assert_eq!(back.indegree[row], table.indegree[i]);
            assert_eq!(back.eigenvector_norm[row], table.eigenvector_norm[i]);
            assert_eq!(back.clustering[row], table.clustering[i]);
        }
    }
}
