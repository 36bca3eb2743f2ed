//! Directed weighted forwarding graph.
//!
//! Channels are nodes; a directed edge `u -> v` records that messages were
//! forwarded from `u` to `v`. Multiplicity lives in the edge weight: at most
//! one edge exists per ordered pair. Self-forwards are never stored; they are
//! dropped at construction time and counted in a tally so ingestion totals
//! remain auditable.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};

/// Index of a node inside a [`ForwardGraph`]. Stable for the lifetime of the
/// graph value; not stable across removals (removal builds a new graph).
pub type NodeIdx = usize;

/// Canonical form of a channel identifier: trimmed, one leading `@` stripped,
/// lowercased. Comparison happens on this form everywhere; display labels keep
/// the raw spelling.
pub fn normalize_id(raw: &str) -> Result<String> {
    let trimmed = raw.trim();
    let stripped = trimmed.strip_prefix('@').unwrap_or(trimmed);
    let normalized = stripped.to_lowercase();
    if normalized.is_empty() {
        return Err(Error::MalformedId(raw.to_string()));
    }
    Ok(normalized)
}

/// Outcome of feeding one forwarding event into the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOutcome {
    /// First event for this ordered pair; a weight-1 edge was created.
    Added,
    /// The ordered pair already existed; its weight was incremented.
    Incremented,
    /// Source equals target after normalization; nothing stored, tally bumped.
    SelfLoopDropped,
}

/// Directed weighted multigraph of forwarding events, with multiplicities
/// collapsed onto per-pair weights.
#[derive(Debug, Clone, Default)]
pub struct ForwardGraph {
    ids: Vec<String>,
    labels: Vec<String>,
    seeds: Vec<bool>,
    index: HashMap<String, NodeIdx>,
    out: Vec<BTreeMap<NodeIdx, u64>>,
    inc: Vec<BTreeMap<NodeIdx, u64>>,
    edge_count: usize,
    dropped_self_loops: u64,
}

/// Set-semantic equality: same nodes (id, label, seed flag) and same weighted
/// edge set. Insertion order is an implementation detail and does not count.
impl PartialEq for ForwardGraph {
    fn eq(&self, other: &Self) -> bool {
        if self.ids.len() != other.ids.len() || self.edge_count != other.edge_count {
            return false;
        }
        for (id, &idx) in &self.index {
            let Some(&oidx) = other.index.get(id) else {
                return false;
            };
            if self.labels[idx] != other.labels[oidx] || self.seeds[idx] != other.seeds[oidx] {
                return false;
            }
            if self.out[idx].len() != other.out[oidx].len() {
                return false;
            }
            for (&t, &w) in &self.out[idx] {
                let matches = other
                    .index
                    .get(&self.ids[t])
                    .and_then(|&ot| other.out[oidx].get(&ot))
                    .is_some_and(|&ow| ow == w);
                if !matches {
                    return false;
                }
            }
        }
        true
    }
}

impl ForwardGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a node if its normalized id is new; returns the node index
    /// either way. The first raw spelling seen becomes the display label.
    pub fn add_node(&mut self, raw: &str) -> Result<NodeIdx> {
        self.add_node_labeled(raw, raw.trim())
    }

    /// Like [`ForwardGraph::add_node`] but with an explicit display label,
    /// used by importers that carry id and label separately. The label of an
    /// existing node is not overwritten.
    pub fn add_node_labeled(&mut self, raw: &str, label: &str) -> Result<NodeIdx> {
        let id = normalize_id(raw)?;
        if let Some(&idx) = self.index.get(&id) {
            return Ok(idx);
        }
        let idx = self.ids.len();
        self.index.insert(id.clone(), idx);
        self.ids.push(id);
        self.labels.push(label.to_string());
        self.seeds.push(false);
        self.out.push(BTreeMap::new());
        self.inc.push(BTreeMap::new());
        Ok(idx)
    }

    /// Records one forwarding event `source -> target`. Both endpoints are
    /// created on demand. A repeated ordered pair increments the existing
    /// weight; a self-loop after normalization is dropped and tallied.
    pub fn add_edge(&mut self, source: &str, target: &str) -> Result<EdgeOutcome> {
        let src_id = normalize_id(source)?;
        let dst_id = normalize_id(target)?;
        if src_id == dst_id {
            self.dropped_self_loops += 1;
            return Ok(EdgeOutcome::SelfLoopDropped);
        }
        let s = self.add_node(source)?;
        let t = self.add_node(target)?;
        let entry = self.out[s].entry(t).or_insert(0);
        let outcome = if *entry == 0 {
            self.edge_count += 1;
            EdgeOutcome::Added
        } else {
            EdgeOutcome::Incremented
        };
        *entry += 1;
        *self.inc[t].entry(s).or_insert(0) += 1;
        Ok(outcome)
    }

    /// Inserts an edge with an explicit collapsed weight. Used by format
    /// importers, which must not contain self-loops or duplicate pairs.
    pub fn add_edge_with_weight(&mut self, source: &str, target: &str, weight: u64) -> Result<()> {
        if weight == 0 {
            return Err(Error::InvalidArgument(format!(
                "edge {source} -> {target} has weight 0; weights must be >= 1"
            )));
        }
        let src_id = normalize_id(source)?;
        let dst_id = normalize_id(target)?;
        if src_id == dst_id {
            return Err(Error::Parse(format!(
                "self-loop edge {source} -> {target} is not representable"
            )));
        }
        let s = self.add_node(source)?;
        let t = self.add_node(target)?;
        if self.out[s].contains_key(&t) {
            return Err(Error::Parse(format!(
                "duplicate edge {src_id} -> {dst_id}"
            )));
        }
        self.out[s].insert(t, weight);
        self.inc[t].insert(s, weight);
        self.edge_count += 1;
        Ok(())
    }

    /// Flags a channel as one of the seed channels the collection started
    /// from. No-op if the id is unknown.
    pub fn mark_seed(&mut self, raw: &str) -> Result<bool> {
        let id = normalize_id(raw)?;
        if let Some(&idx) = self.index.get(&id) {
            self.seeds[idx] = true;
            return Ok(true);
        }
        Ok(false)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// Number of distinct ordered pairs carrying an edge (weights ignored).
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sum of all edge weights, i.e. the number of stored forwarding events.
    pub fn total_weight(&self) -> u64 {
        self.out.iter().flat_map(|m| m.values()).sum()
    }

    pub fn dropped_self_loops(&self) -> u64 {
        self.dropped_self_loops
    }

    pub fn node_idx(&self, raw: &str) -> Option<NodeIdx> {
        let id = normalize_id(raw).ok()?;
        self.index.get(&id).copied()
    }

    pub fn id(&self, idx: NodeIdx) -> &str {
        &self.ids[idx]
    }

    pub fn label(&self, idx: NodeIdx) -> &str {
        &self.labels[idx]
    }

    pub fn is_seed(&self, idx: NodeIdx) -> bool {
        self.seeds[idx]
    }

    /// Node ids in insertion order.
    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.ids.iter().map(String::as_str)
    }

    /// Outgoing edges of `idx` as `(target, weight)`, ascending by target.
    pub fn out_edges(&self, idx: NodeIdx) -> impl Iterator<Item = (NodeIdx, u64)> + '_ {
        self.out[idx].iter().map(|(&t, &w)| (t, w))
    }

    /// Incoming edges of `idx` as `(source, weight)`, ascending by source.
    pub fn in_edges(&self, idx: NodeIdx) -> impl Iterator<Item = (NodeIdx, u64)> + '_ {
        self.inc[idx].iter().map(|(&s, &w)| (s, w))
    }

    pub fn in_degree(&self, idx: NodeIdx) -> usize {
        self.inc[idx].len()
    }

    pub fn out_degree(&self, idx: NodeIdx) -> usize {
        self.out[idx].len()
    }

    pub fn weight(&self, source: NodeIdx, target: NodeIdx) -> Option<u64> {
        self.out[source].get(&target).copied()
    }

    pub fn has_edge(&self, source: NodeIdx, target: NodeIdx) -> bool {
        self.out[source].contains_key(&target)
    }

    /// All edges as `(source, target, weight)` in (source, target) order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeIdx, NodeIdx, u64)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(s, m)| m.iter().map(move |(&t, &w)| (s, t, w)))
    }

    /// Network density `2|E| / (|V|(|V|-1))` over distinct ordered pairs.
    ///
    /// Uses the factor-2 form even though the graph is directed, so values
    /// are comparable with tools that report the undirected-style figure for
    /// forwarding networks. See [`ForwardGraph::directed_density`] for the
    /// directed variant.
    pub fn density(&self) -> Result<f64> {
        let n = self.node_count();
        if n < 2 {
            return Err(Error::UndefinedMetric(format!(
                "density requires at least 2 nodes, graph has {n}"
            )));
        }
        Ok(2.0 * self.edge_count as f64 / (n as f64 * (n as f64 - 1.0)))
    }

    /// Directed density `|E| / (|V|(|V|-1))`, always in `[0, 1]`.
    pub fn directed_density(&self) -> Result<f64> {
        self.density().map(|d| d / 2.0)
    }

    /// Mean shortest-path hop count over all ordered pairs `(u, v)`, `u != v`,
    /// where `v` is reachable from `u` along edge directions. Unreachable
    /// pairs are excluded from both numerator and denominator.
    pub fn average_path_length(&self) -> Result<f64> {
        let n = self.node_count();
        let mut total_hops: u64 = 0;
        let mut reachable_pairs: u64 = 0;
        let mut dist = vec![u32::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        for start in 0..n {
            dist.iter_mut().for_each(|d| *d = u32::MAX);
            dist[start] = 0;
            queue.clear();
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                let du = dist[u];
                for (v, _) in self.out_edges(u) {
                    if dist[v] == u32::MAX {
                        dist[v] = du + 1;
                        total_hops += u64::from(dist[v]);
                        reachable_pairs += 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        if reachable_pairs == 0 {
            return Err(Error::UndefinedMetric(
                "average path length requires at least one reachable ordered pair".to_string(),
            ));
        }
        Ok(total_hops as f64 / reachable_pairs as f64)
    }

    /// Writes the graph as `source<TAB>target<TAB>weight` lines, one edge per
    /// line, nodes identified by normalized id, edges in (source, target)
    /// index order.
    pub fn write_edgelist<W: Write>(&self, mut w: W) -> Result<()> {
        for (s, t, weight) in self.edges() {
            writeln!(w, "{}\t{}\t{}", self.ids[s], self.ids[t], weight)?;
        }
        Ok(())
    }

    /// Parses the edge-list format produced by [`ForwardGraph::write_edgelist`].
    pub fn read_edgelist<R: Read>(r: R) -> Result<ForwardGraph> {
        let mut g = ForwardGraph::new();
        for (lineno, line) in BufReader::new(r).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (src, dst, w) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some(s), Some(t), Some(w), None) => (s, t, w),
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected source<TAB>target<TAB>weight",
                        lineno + 1
                    )))
                }
            };
            let weight: u64 = w.parse().map_err(|_| {
                Error::Parse(format!("line {}: invalid weight {w:?}", lineno + 1))
            })?;
            g.add_edge_with_weight(src, dst, weight)
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(g)
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
    fn add_edge_base_case() {
        let g = graph_from(&[("A", "B")]);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        let a = g.node_idx("A").unwrap();
        let b = g.node_idx("B").unwrap();
        assert_eq!(g.weight(a, b), Some(1));
    }

    #[test]
    fn add_edge_collapses_multiplicity() {
        let g = graph_from(&[("A", "B"), ("A", "B")]);
        assert_eq!(g.edge_count(), 1);
        let a = g.node_idx("A").unwrap();
        let b = g.node_idx("B").unwrap();
        assert_eq!(g.weight(a, b), Some(2));
    }

    #[test]
    fn ordered_pairs_are_distinct() {
        let g = graph_from(&[("A", "B"), ("B", "A")]);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn self_loops_dropped_and_tallied() {
        let mut g = ForwardGraph::new();
        assert_eq!(g.add_edge("a", "@A ").unwrap(), EdgeOutcome::SelfLoopDropped);
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.dropped_self_loops(), 1);
    }

    #[test]
    fn id_normalization_is_applied_at_the_boundary() {
        let mut g = ForwardGraph::new();
        g.add_edge("@Lomovkaa", "x").unwrap();
        g.add_edge(" lomovkaa ", "y").unwrap();
        assert_eq!(g.node_count(), 3);
        let idx = g.node_idx("LOMOVKAA").unwrap();
        assert_eq!(g.id(idx), "lomovkaa");
        assert_eq!(g.label(idx), "@Lomovkaa");
    }

    #[test]
    fn empty_id_is_rejected() {
        let mut g = ForwardGraph::new();
        assert!(matches!(g.add_edge("@", "b"), Err(Error::MalformedId(_))));
        assert!(matches!(g.add_edge("a", "  "), Err(Error::MalformedId(_))));
    }

    #[test]
    fn density_direct_arithmetic() {
        let g = graph_from(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")]);
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.density().unwrap(), 0.4);
        assert_eq!(g.directed_density().unwrap(), 0.2);
    }

    #[test]
    fn density_undefined_below_two_nodes() {
        let mut g = ForwardGraph::new();
        assert!(matches!(g.density(), Err(Error::UndefinedMetric(_))));
        g.add_node("solo").unwrap();
        assert!(matches!(g.density(), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn density_formula_boundary_on_complete_digraph() {
        // The factor-2 form exceeds 1 once more than half of the ordered
        // pairs carry edges; the directed variant stays capped at 1.
        let g = graph_from(&[
            ("a", "b"),
            ("b", "a"),
            ("a", "c"),
            ("c", "a"),
            ("b", "c"),
            ("c", "b"),
        ]);
        assert_eq!(g.density().unwrap(), 2.0);
        assert_eq!(g.directed_density().unwrap(), 1.0);
    }

    #[test]
    fn density_ignores_weights() {
        let g = graph_from(&[("a", "b"), ("a", "b"), ("a", "b"), ("b", "c")]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.density().unwrap(), 2.0 * 2.0 / (3.0 * 2.0));
    }

    #[test]
    fn average_path_length_on_directed_path() {
        // d(A,B)=1, d(B,C)=1, d(A,C)=2 -> 4/3; reverse pairs unreachable.
        let g = graph_from(&[("a", "b"), ("b", "c")]);
        assert!((g.average_path_length().unwrap() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn average_path_length_on_three_cycle() {
        let g = graph_from(&[("a", "b"), ("b", "c"), ("c", "a")]);
        assert_eq!(g.average_path_length().unwrap(), 1.5);
    }

    #[test]
    fn average_path_length_undefined_without_reachable_pair() {
        let mut g = ForwardGraph::new();
        g.add_node("a").unwrap();
        g.add_node("b").unwrap();
        assert!(matches!(
            g.average_path_length(),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn edgelist_round_trip() {
        let g = graph_from(&[("a", "b"), ("a", "b"), ("b", "c"), ("c", "a")]);
        let mut buf = Vec::new();
        g.write_edgelist(&mut buf).unwrap();
        let back = ForwardGraph::read_edgelist(buf.as_slice()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn edgelist_rejects_malformed_lines() {
        assert!(ForwardGraph::read_edgelist("a\tb".as_bytes()).is_err());
        assert!(ForwardGraph::read_edgelist("a\tb\tzero".as_bytes()).is_err());
        assert!(ForwardGraph::read_edgelist("a\ta\t1".as_bytes()).is_err());
        assert!(ForwardGraph::read_edgelist("a\tb\t1\na\tb\t2".as_bytes()).is_err());
    }

    #[test]
    fn conservation_of_ingested_events() {
        let mut g = ForwardGraph::new();
        let events = [("a", "b"), ("a", "b"), ("b", "b"), ("c", "a"), ("x", "x")];
        for (s, t) in events {
            g.add_edge(s, t).unwrap();
        }
        assert_eq!(
            g.total_weight() + g.dropped_self_loops(),
            events.len() as u64
        );
    }
}
