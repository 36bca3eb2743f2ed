//! Seeded synthetic graph generators for experiments and test fixtures.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::ForwardGraph;

fn node_name(i: usize) -> String {
    format!("n{i:04}")
}

/// Preferential-attachment digraph: each arriving node forwards to
/// `edges_per_node` distinct existing targets chosen with probability
/// proportional to `in-degree + 1`, so early nodes become heavy-tailed hubs.
/// Deterministic for a fixed seed.
pub fn preferential_attachment(n: usize, edges_per_node: usize, seed: u64) -> ForwardGraph {
    let m = edges_per_node.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ForwardGraph::new();
    let core = (m + 1).min(n);
    for i in 0..core {
        g.add_node(&node_name(i)).unwrap();
    }
    // Small directed cycle so the initial targets are not degree-0 ties.
    if core > 1 {
        for i in 0..core {
            g.add_edge(&node_name(i), &node_name((i + 1) % core)).unwrap();
        }
    }
    let mut in_deg: Vec<u64> = (0..core).map(|i| g.in_degree(i) as u64).collect();
    for new in core..n {
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        let picks = m.min(new);
        while chosen.len() < picks {
            let total: u64 = in_deg
                .iter()
                .enumerate()
                .filter(|(i, _)| !chosen.contains(i))
                .map(|(_, &d)| d + 1)
                .sum();
            let mut ticket = rng.gen_range(0..total);
            let mut pick = 0;
            for (i, &d) in in_deg.iter().enumerate() {
                if chosen.contains(&i) {
                    continue;
                }
                let mass = d + 1;
                if ticket < mass {
                    pick = i;
                    break;
                }
                ticket -= mass;
            }
            chosen.push(pick);
        }
        g.add_node(&node_name(new)).unwrap();
        in_deg.push(0);
        for target in chosen {
            g.add_edge(&node_name(new), &node_name(target)).unwrap();
            in_deg[target] += 1;
        }
    }
    g
}

/// Uniform random digraph: every ordered pair (u, v), u != v, carries an edge
/// independently with probability `edge_prob`. Deterministic for a fixed
/// seed.
pub fn random_digraph(n: usize, edge_prob: f64, seed: u64) -> ForwardGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ForwardGraph::new();
    for i in 0..n {
        g.add_node(&node_name(i)).unwrap();
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(edge_prob) {
                g.add_edge(&node_name(u), &node_name(v)).unwrap();
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preferential_attachment_is_deterministic() {
        let a = preferential_attachment(60, 3, 7);
        let b = preferential_attachment(60, 3, 7);
        assert_eq!(a, b);
        assert_eq!(a.node_count(), 60);
    }

    #[test]
    fn preferential_attachment_grows_hubs() {
        let g = preferential_attachment(300, 3, 1);
        let max_in = (0..g.node_count()).map(|i| g.in_degree(i)).max().unwrap();
        let mean_in = g.edge_count() as f64 / g.node_count() as f64;
        assert!(
            max_in as f64 > 4.0 * mean_in,
            "expected a hub, max in-degree {max_in} vs mean {mean_in:.2}"
        );
    }

    #[test]
    fn random_digraph_respects_probability_extremes() {
        let empty = random_digraph(10, 0.0, 3);
        assert_eq!(empty.edge_count(), 0);
        let full = random_digraph(10, 1.0, 3);
        assert_eq!(full.edge_count(), 90);
    }
}
