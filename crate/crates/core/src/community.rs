//! Louvain community detection with a resolution parameter.
//!
//! Detection runs on the undirected weighted projection of the forwarding
//! graph: the weight between two channels is the total forward volume in both
//! directions. Node visit order is shuffled by a seeded generator so runs are
//! reproducible; ties in modularity gain resolve to the lowest community id.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::ForwardGraph;

/// A complete node-to-community assignment together with its quality.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Normalized channel id -> community id. Community ids are dense
    /// integers from 0, numbered by first appearance in node insertion order.
    pub assignment: BTreeMap<String, usize>,
    pub modularity: f64,
    pub resolution: f64,
    pub community_count: usize,
}

/// Undirected weighted projection in index space.
struct Projection {
    adj: Vec<BTreeMap<usize, f64>>,
    degree: Vec<f64>,
    /// Total undirected edge weight (each unordered pair counted once).
    m: f64,
}

fn project(g: &ForwardGraph) -> Projection {
    let n = g.node_count();
    let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    let mut m = 0.0;
    for (s, t, w) in g.edges() {
        let w = w as f64;
        *adj[s].entry(t).or_insert(0.0) += w;
        *adj[t].entry(s).or_insert(0.0) += w;
        m += w;
    }
    let degree = adj.iter().map(|nb| nb.values().sum()).collect();
    Projection { adj, degree, m }
}

fn assignment_to_indices(g: &ForwardGraph, assignment: &BTreeMap<String, usize>) -> Result<Vec<usize>> {
    if assignment.len() != g.node_count() {
        return Err(Error::PartitionMismatch(format!(
            "partition assigns {} nodes, graph has {}",
            assignment.len(),
            g.node_count()
        )));
    }
    let mut by_idx = vec![usize::MAX; g.node_count()];
    for (id, &comm) in assignment {
        match g.node_idx(id) {
            Some(idx) => by_idx[idx] = comm,
            None => {
                return Err(Error::PartitionMismatch(format!(
                    "partition covers unknown node {id:?}"
                )))
            }
        }
    }
    Ok(by_idx)
}

/// Newman modularity with resolution scaling on the undirected weighted
/// projection:
/// `Q = sum_c [ e_c / m - resolution * (d_c / 2m)^2 ]`
/// with `e_c` the intra-community weight and `d_c` the community degree sum.
pub fn modularity(
    g: &ForwardGraph,
    assignment: &BTreeMap<String, usize>,
    resolution: f64,
) -> Result<f64> {
    let comm = assignment_to_indices(g, assignment)?;
    let proj = project(g);
    modularity_indexed(&proj, &comm, resolution)
}

fn modularity_indexed(proj: &Projection, comm: &[usize], resolution: f64) -> Result<f64> {
    if proj.m == 0.0 {
        return Err(Error::UndefinedMetric(
            "modularity requires at least one edge".to_string(),
        ));
    }
    let ncomm = comm.iter().copied().max().map_or(0, |c| c + 1);
    let mut intra = vec![0.0; ncomm];
    let mut degree = vec![0.0; ncomm];
    for (u, nb) in proj.adj.iter().enumerate() {
        degree[comm[u]] += proj.degree[u];
        for (&v, &w) in nb {
            if v > u && comm[u] == comm[v] {
                intra[comm[u]] += w;
            }
        }
    }
    let two_m = 2.0 * proj.m;
    let q = intra
        .iter()
        .zip(degree.iter())
        .map(|(&e, &d)| e / proj.m - resolution * (d / two_m) * (d / two_m))
        .sum();
    Ok(q)
}

/// Working graph for the aggregation phases. Unlike [`ForwardGraph`] it
/// carries self-loop weights, which appear when a community collapses.
struct WorkGraph {
    adj: Vec<BTreeMap<usize, f64>>,
    self_weight: Vec<f64>,
    /// Degree includes twice the self-loop weight.
    degree: Vec<f64>,
    m: f64,
}

impl WorkGraph {
    fn from_projection(proj: Projection) -> Self {
        let n = proj.adj.len();
        WorkGraph {
            degree: proj.degree.clone(),
            adj: proj.adj,
            self_weight: vec![0.0; n],
            m: proj.m,
        }
    }

    fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// One sweep of local moves until no node improves modularity.
    /// Returns the node -> community map and whether anything moved.
    fn local_moves(&self, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.node_count();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut comm_degree = self.degree.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let m = self.m;
        let mut moved_any = false;
        loop {
            let mut moved_this_pass = false;
            for &u in &order {
                let current = comm[u];
                comm_degree[current] -= self.degree[u];
                let mut weight_to: BTreeMap<usize, f64> = BTreeMap::new();
                for (&v, &w) in &self.adj[u] {
                    *weight_to.entry(comm[v]).or_insert(0.0) += w;
                }
                let to_current = weight_to.get(&current).copied().unwrap_or(0.0);
                let mut best_comm = current;
                let mut best_gain = 0.0;
                for (&candidate, &to_candidate) in &weight_to {
                    if candidate == current {
                        continue;
                    }
                    // Exact modularity delta for moving u from its community
                    // (tallies already exclude u) into the candidate.
                    let gain = (to_candidate - to_current) / m
                        - resolution * self.degree[u] * (comm_degree[candidate] - comm_degree[current])
                            / (2.0 * m * m);
                    if gain > best_gain {
                        best_gain = gain;
                        best_comm = candidate;
                    }
                }
                comm_degree[best_comm] += self.degree[u];
                if best_comm != current {
                    comm[u] = best_comm;
                    moved_this_pass = true;
                    moved_any = true;
                }
            }
            if !moved_this_pass {
                break;
            }
        }
        (comm, moved_any)
    }

    /// Collapses communities into supernodes, keeping total weight constant.
    /// `comm` must use dense ids `0..ncomm`.
    fn aggregate(&self, comm: &[usize], ncomm: usize) -> WorkGraph {
        let mut adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); ncomm];
        let mut self_weight = vec![0.0; ncomm];
        for (u, &cu) in comm.iter().enumerate() {
            self_weight[cu] += self.self_weight[u];
            for (&v, &w) in &self.adj[u] {
                let cv = comm[v];
                if cu == cv {
                    if v > u {
                        self_weight[cu] += w;
                    }
                } else {
                    *adj[cu].entry(cv).or_insert(0.0) += w;
                }
            }
        }
        let degree = adj
            .iter()
            .zip(self_weight.iter())
            .map(|(nb, &sw)| nb.values().sum::<f64>() + 2.0 * sw)
            .collect();
        WorkGraph {
            adj,
            self_weight,
            degree,
            m: self.m,
        }
    }
}

/// Renumbers community labels densely by first appearance.
fn densify(comm: &mut [usize]) -> usize {
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    let mut next = 0;
    for c in comm.iter_mut() {
        let dense = *remap.entry(*c).or_insert_with(|| {
            let id = next;
            next += 1;
            id
        });
        *c = dense;
    }
    next
}

/// Louvain heuristic: repeated local-move and aggregation phases until no
/// modularity gain remains. Deterministic for a fixed `(graph, resolution,
/// seed)` triple.
pub fn louvain(g: &ForwardGraph, resolution: f64, seed: u64) -> Result<Partition> {
    if resolution <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    if g.edge_count() == 0 {
        return Err(Error::UndefinedMetric(
            "community detection requires at least one edge".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut work = WorkGraph::from_projection(project(g));
    // membership[original node] = current supernode index.
    let mut membership: Vec<usize> = (0..g.node_count()).collect();
    loop {
        let (mut comm, moved) = work.local_moves(resolution, &mut rng);
        if !moved {
            break;
        }
        let ncomm = densify(&mut comm);
        for slot in membership.iter_mut() {
            *slot = comm[*slot];
        }
        if ncomm == work.node_count() {
            break;
        }
        work = work.aggregate(&comm, ncomm);
    }
    let community_count = densify(&mut membership);
    let assignment: BTreeMap<String, usize> = g
        .node_ids()
        .zip(membership.iter())
        .map(|(id, &c)| (id.to_string(), c))
        .collect();
    let q = modularity(g, &assignment, resolution)?;
    Ok(Partition {
        assignment,
        modularity: q,
        resolution,
        community_count,
    })
}

/// Exhaustive modularity maximization over every set partition of the nodes,
/// enumerated as restricted growth strings. Only feasible on tiny graphs; the
/// node count is capped to keep the search below Bell(12).
pub fn exhaustive_best_partition(g: &ForwardGraph, resolution: f64) -> Result<Partition> {
    let n = g.node_count();
    if n == 0 || n > 12 {
        return Err(Error::InvalidArgument(format!(
            "exhaustive partition search supports 1..=12 nodes, graph has {n}"
        )));
    }
    if g.edge_count() == 0 {
        return Err(Error::UndefinedMetric(
            "modularity requires at least one edge".to_string(),
        ));
    }
    let proj = project(g);
    let mut labels = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let q = modularity_indexed(&proj, &labels, resolution)?;
        if best.as_ref().is_none_or(|(bq, _)| q > *bq) {
            best = Some((q, labels.clone()));
        }
        // Next restricted growth string: labels[i] <= max(labels[..i]) + 1.
        let mut i = n;
        let mut advanced = false;
        while i > 1 {
            i -= 1;
            let cap = labels[..i].iter().copied().max().unwrap_or(0) + 1;
            if labels[i] < cap {
                labels[i] += 1;
                labels[i + 1..].iter_mut().for_each(|l| *l = 0);
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }
    let (q, mut labels) = best.unwrap();
    let community_count = densify(&mut labels);
    let assignment = g
        .node_ids()
        .zip(labels.iter())
        .map(|(id, &c)| (id.to_string(), c))
        .collect();
    Ok(Partition {
        assignment,
        modularity: q,
        resolution,
        community_count,
    })
}

impl Partition {
    /// Writes `channel,community`, rows sorted by channel id.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["channel", "community"])?;
        for (id, comm) in &self.assignment {
            wtr.write_record([id.clone(), comm.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Parses a `channel,community` CSV. Modularity and resolution are not
    /// stored in the file; callers supply the resolution used to produce it.
    pub fn read_csv<R: Read>(r: R, resolution: f64) -> Result<Partition> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        let channel = headers.iter().position(|h| h == "channel").ok_or_else(|| {
            Error::MissingColumn {
                file: "partition CSV".to_string(),
                column: "channel".to_string(),
            }
        })?;
        let community = headers.iter().position(|h| h == "community").ok_or_else(|| {
            Error::MissingColumn {
                file: "partition CSV".to_string(),
                column: "community".to_string(),
            }
        })?;
        let mut assignment = BTreeMap::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let id = record.get(channel).unwrap_or("").to_string();
            let comm: usize = record
                .get(community)
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::Parse(format!("partition row {}: bad community", line + 2)))?;
            assignment.insert(id, comm);
        }
        let community_count = assignment
            .values()
            .copied()
            .collect::<std::collections::BTreeSet<_>>()
            .len();
        Ok(Partition {
            assignment,
            modularity: f64::NAN,
            resolution,
            community_count,
        })
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

    /// Two directed 4-cliques joined by a single edge.
    fn two_four_cliques() -> ForwardGraph {
        let mut edges = Vec::new();
        let clique = |offset: usize, edges: &mut Vec<(String, String)>| {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    edges.push((format!("n{}", offset + i), format!("n{}", offset + j)));
                }
            }
        };
        clique(0, &mut edges);
        clique(4, &mut edges);
        edges.push(("n0".to_string(), "n4".to_string()));
        let mut g = ForwardGraph::new();
        for (s, t) in &edges {
            g.add_edge(s, t).unwrap();
        }
        g
    }

    #[test]
    fn modularity_two_cliques_matches_hand_value() {
        // m = 13; per clique: intra weight 6, degree sum 13.
        // Q = 2 * (6/13 - (13/26)^2) = 11/26.
        let g = two_four_cliques();
        let mut assignment = BTreeMap::new();
        for i in 0..8 {
            assignment.insert(format!("n{i}"), usize::from(i >= 4));
        }
        let q = modularity(&g, &assignment, 1.0).unwrap();
        assert!((q - 11.0 / 26.0).abs() < 1e-12);
    }

    #[test]
    fn modularity_single_community_is_zero() {
        let g = graph_from(&[("a", "b"), ("b", "c"), ("c", "a"), ("a", "c")]);
        let assignment: BTreeMap<String, usize> =
            g.node_ids().map(|id| (id.to_string(), 0)).collect();
        assert!(modularity(&g, &assignment, 1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn modularity_errors_on_edgeless_graph() {
        let mut g = ForwardGraph::new();
        g.add_node("a").unwrap();
        g.add_node("b").unwrap();
        let assignment: BTreeMap<String, usize> = [("a", 0), ("b", 1)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert!(matches!(
            modularity(&g, &assignment, 1.0),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn modularity_errors_on_partition_mismatch() {
        let g = graph_from(&[("a", "b")]);
        let missing: BTreeMap<String, usize> = [("a".to_string(), 0)].into_iter().collect();
        assert!(matches!(
            modularity(&g, &missing, 1.0),
            Err(Error::PartitionMismatch(_))
        ));
        let unknown: BTreeMap<String, usize> = [("a", 0), ("zzz", 1)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        assert!(matches!(
            modularity(&g, &unknown, 1.0),
            Err(Error::PartitionMismatch(_))
        ));
    }

    #[test]
    fn louvain_recovers_two_cliques() {
        let g = two_four_cliques();
        let p = louvain(&g, 1.0, 42).unwrap();
        assert_eq!(p.community_count, 2);
        for i in 0..4 {
            assert_eq!(p.assignment[&format!("n{i}")], p.assignment["n0"]);
            assert_eq!(p.assignment[&format!("n{}", i + 4)], p.assignment["n4"]);
        }
        assert!((p.modularity - 11.0 / 26.0).abs() < 1e-12);
    }

    #[test]
    fn louvain_single_triangle_is_one_community() {
        let g = graph_from(&[("a", "b"), ("b", "c"), ("a", "c")]);
        let p = louvain(&g, 1.0, 7).unwrap();
        assert_eq!(p.community_count, 1);
        assert!(p.modularity.abs() < 1e-15);
    }

    #[test]
    fn louvain_errors_on_edgeless_graph() {
        let mut g = ForwardGraph::new();
        g.add_node("a").unwrap();
        assert!(matches!(
            louvain(&g, 1.0, 0),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn louvain_is_deterministic_under_seed() {
        let g = two_four_cliques();
        let p1 = louvain(&g, 2.2, 99).unwrap();
        let p2 = louvain(&g, 2.2, 99).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn louvain_beats_trivial_partitions() {
        let g = two_four_cliques();
        let p = louvain(&g, 1.0, 3).unwrap();
        let singletons: BTreeMap<String, usize> = g
            .node_ids()
            .enumerate()
            .map(|(i, id)| (id.to_string(), i))
            .collect();
        let q_singletons = modularity(&g, &singletons, 1.0).unwrap();
        assert!(p.modularity >= q_singletons);
        assert!(p.modularity >= 0.0);
    }

    #[test]
    fn higher_resolution_never_coarsens_the_two_clique_fixture() {
        let g = two_four_cliques();
        let coarse = louvain(&g, 0.5, 11).unwrap();
        let fine = louvain(&g, 4.0, 11).unwrap();
        assert!(fine.community_count >= coarse.community_count);
    }

    #[test]
    fn exhaustive_oracle_on_bowtie() {
        // Two triangles sharing no nodes, joined by one edge: the optimum
        // splits the triangles.
        let g = graph_from(&[
            ("a", "b"),
            ("b", "c"),
            ("a", "c"),
            ("x", "y"),
            ("y", "z"),
            ("x", "z"),
            ("c", "x"),
        ]);
        let best = exhaustive_best_partition(&g, 1.0).unwrap();
        assert_eq!(best.community_count, 2);
        let p = louvain(&g, 1.0, 5).unwrap();
        assert_eq!(p.assignment, best.assignment);
        assert_eq!(p.modularity, best.modularity);
    }

    #[test]
    fn partition_csv_round_trip() {
        let g = two_four_cliques();
        let p = louvain(&g, 1.0, 42).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = Partition::read_csv(buf.as_slice(), 1.0).unwrap();
        assert_eq!(back.assignment, p.assignment);
        assert_eq!(back.community_count, p.community_count);
    }
}
