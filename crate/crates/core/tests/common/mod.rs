//! Shared fixtures and independent dense oracles for the integration suites.
//! The oracles deliberately use dense-matrix formulations so they exercise a
//! different code path than the adjacency-list implementations they check.

#![allow(dead_code)]

use bridgenet::graph::ForwardGraph;

pub fn graph_from(edges: &[(&str, &str)]) -> ForwardGraph {
    let mut g = ForwardGraph::new();
    for (s, t) in edges {
        g.add_edge(s, t).unwrap();
    }
    g
}

/// Directed clique over the given ids: one edge per unordered pair, oriented
/// low index -> high index.
pub fn add_clique(g: &mut ForwardGraph, ids: &[String]) {
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            g.add_edge(&ids[i], &ids[j]).unwrap();
        }
    }
}

/// Two 5-cliques {a0..a4} and {b0..b4} joined by the single edge a0 -> b0.
pub fn two_five_cliques_single_edge() -> ForwardGraph {
    let mut g = ForwardGraph::new();
    let a: Vec<String> = (0..5).map(|i| format!("a{i}")).collect();
    let b: Vec<String> = (0..5).map(|i| format!("b{i}")).collect();
    add_clique(&mut g, &a);
    add_clique(&mut g, &b);
    g.add_edge("a0", "b0").unwrap();
    g
}

/// Two 5-cliques joined through a hub node `mid` adjacent to every clique
/// member (no direct clique-to-clique edge).
pub fn two_five_cliques_bridge_node() -> ForwardGraph {
    let mut g = ForwardGraph::new();
    let a: Vec<String> = (0..5).map(|i| format!("a{i}")).collect();
    let b: Vec<String> = (0..5).map(|i| format!("b{i}")).collect();
    add_clique(&mut g, &a);
    add_clique(&mut g, &b);
    for id in &a {
        g.add_edge(id, "mid").unwrap();
    }
    for id in &b {
        g.add_edge("mid", id).unwrap();
    }
    g
}

/// Three vertex-disjoint directed triangles.
pub fn three_triangles() -> ForwardGraph {
    let mut g = ForwardGraph::new();
    for t in 0..3 {
        let ids: Vec<String> = (0..3).map(|i| format!("t{t}n{i}")).collect();
        add_clique(&mut g, &ids);
    }
    g
}

/// Dense 0/1 adjacency: `adj[u][v]` is true iff the edge u -> v exists.
pub fn dense_adjacency(g: &ForwardGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut adj = vec![vec![false; n]; n];
    for (s, t, _) in g.edges() {
        adj[s][t] = true;
    }
    adj
}

/// Column sums of the dense adjacency matrix.
pub fn oracle_indegree(adj: &[Vec<bool>]) -> Vec<u64> {
    let n = adj.len();
    (0..n)
        .map(|v| (0..n).filter(|&u| adj[u][v]).count() as u64)
        .collect()
}

/// Brute-force clustering: enumerate all neighbor pairs on the symmetrized
/// matrix and count connected ones.
pub fn oracle_clustering(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    let sym = |a: usize, b: usize| adj[a][b] || adj[b][a];
    (0..n)
        .map(|v| {
            let neighbors: Vec<usize> = (0..n).filter(|&u| u != v && sym(u, v)).collect();
            let k = neighbors.len();
            if k < 2 {
                return 0.0;
            }
            let mut tri = 0u64;
            for i in 0..k {
                for j in (i + 1)..k {
                    if sym(neighbors[i], neighbors[j]) {
                        tri += 1;
                    }
                }
            }
            2.0 * tri as f64 / (k as f64 * (k as f64 - 1.0))
        })
        .collect()
}

/// Dense power method mirroring the damped update: `z = (A^T + I) x`, then
/// `y = (1-d) z + (d/n) sum(z)` (plain `z = A^T x` when `d = 0`), iterated to
/// an L-infinity step difference of 1e-12, output L2-normalized.
pub fn oracle_eigenvector_dense(adj: &[Vec<bool>], damping: f64) -> Vec<f64> {
    let n = adj.len();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..200_000 {
        let mut y = vec![0.0; n];
        for (v, yv) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for u in 0..n {
                if adj[u][v] {
                    acc += x[u];
                }
            }
            *yv = if damping > 0.0 { acc + x[v] } else { acc };
        }
        if damping > 0.0 {
            let sum_z: f64 = y.iter().sum();
            for yv in y.iter_mut() {
                *yv = (1.0 - damping) * *yv + damping * sum_z / n as f64;
            }
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm > 0.0, "oracle power method collapsed to zero");
        let mut delta = 0.0f64;
        for (xi, yi) in x.iter_mut().zip(y.iter()) {
            let next = yi / norm;
            delta = delta.max((next - *xi).abs());
            *xi = next;
        }
        if delta < 1e-12 {
            return x;
        }
    }
    panic!("oracle power method did not converge");
}

/// Floyd–Warshall hop distances; mean over finite off-diagonal entries.
pub fn oracle_average_path_length(adj: &[Vec<bool>]) -> Option<f64> {
    let n = adj.len();
    const INF: u32 = u32::MAX / 4;
    let mut dist = vec![vec![INF; n]; n];
    for u in 0..n {
        dist[u][u] = 0;
        for v in 0..n {
            if adj[u][v] {
                dist[u][v] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let through = dist[i][k] + dist[k][j];
                if through < dist[i][j] {
                    dist[i][j] = through;
                }
            }
        }
    }
    let mut total = 0u64;
    let mut pairs = 0u64;
    for i in 0..n {
        for j in 0..n {
            if i != j && dist[i][j] < INF {
                total += u64::from(dist[i][j]);
                pairs += 1;
            }
        }
    }
    (pairs > 0).then(|| total as f64 / pairs as f64)
}

/// Exact one-sided sign-test p-value: P(Binomial(n, 1/2) >= wins).
pub fn sign_test_p_value(n: u32, wins: u32) -> f64 {
    let mut favorable = 0u128;
    for k in wins..=n {
        favorable += binomial(n, k);
    }
    favorable as f64 / (1u128 << n) as f64
}

fn binomial(n: u32, k: u32) -> u128 {
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result * u128::from(n - i) / u128::from(i + 1);
    }
    result
}
