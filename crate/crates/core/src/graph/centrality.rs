use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::SocialGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterConfig {
    /// Stop once no component moves by this much in one sweep.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hits {
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Centrality {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn normalize(v: &mut [f64]) {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

fn max_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / libm::sqrt(n as f64); n]
}

/// Kleinberg hubs and authorities on the directed graph. Both vectors are
/// renormalized to unit length after every half step; iteration starts from
/// the uniform vector. A graph without edges scores zero everywhere.
pub fn hits(graph: &SocialGraph, config: &IterConfig) -> Hits {
    let n = graph.node_count();
    if graph.edge_count() == 0 {
        return Hits {
            hub: vec![0.0; n],
            authority: vec![0.0; n],
            iterations: 0,
            converged: true,
        };
    }
    let mut hub = uniform(n);
    let mut authority = uniform(n);
    for iter in 1..=config.max_iter {
        let mut next_auth: Vec<f64> = (0..n)
            .map(|v| graph.in_neighbors(v).iter().map(|&u| hub[u]).sum())
            .collect();
        normalize(&mut next_auth);
        let mut next_hub: Vec<f64> = (0..n)
            .map(|u| graph.out_neighbors(u).iter().map(|&v| next_auth[v]).sum())
            .collect();
        normalize(&mut next_hub);
        let delta = max_change(&next_auth, &authority).max(max_change(&next_hub, &hub));
        authority = next_auth;
        hub = next_hub;
        if delta < config.tol {
            return Hits {
                hub,
                authority,
                iterations: iter,
                converged: true,
            };
        }
    }
    Hits {
        hub,
        authority,
        iterations: config.max_iter,
        converged: false,
    }
}

/// Principal eigenvector of the undirected adjacency by power iteration.
///
/// Iterates `x <- (A + I) x`: the shift keeps the eigenvectors but breaks the
/// sign oscillation that plain iteration shows on bipartite graphs.
pub fn eigenvector_centrality(graph: &SocialGraph, config: &IterConfig) -> Centrality {
    let n = graph.node_count();
    if graph.edge_count() == 0 {
        return Centrality {
            scores: vec![0.0; n],
            iterations: 0,
            converged: true,
        };
    }
    let mut x = uniform(n);
    for iter in 1..=config.max_iter {
        let mut next: Vec<f64> = (0..n)
            .map(|v| x[v] + graph.neighbors(v).iter().map(|&u| x[u]).sum::<f64>())
            .collect();
        normalize(&mut next);
        let delta = max_change(&next, &x);
        x = next;
        if delta < config.tol {
            return Centrality {
                scores: x,
                iterations: iter,
                converged: true,
            };
        }
    }
    Centrality {
        scores: x,
        iterations: config.max_iter,
        converged: false,
    }
}

/// Component-local closeness on the undirected view:
/// `(reachable - 1) / sum of distances`, with 0 for isolated nodes.
pub fn closeness(graph: &SocialGraph, v: usize) -> f64 {
    let mut dist = vec![usize::MAX; graph.node_count()];
    dist[v] = 0;
    let mut queue = VecDeque::from([v]);
    let (mut reached, mut total) = (0usize, 0usize);
    while let Some(u) = queue.pop_front() {
        for &w in graph.neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                reached += 1;
                total += dist[w];
                queue.push_back(w);
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        reached as f64 / total as f64
    }
}

fn sorted_intersection_count(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Local clustering coefficient on the undirected view; 0 below degree 2.
pub fn clustering_coefficient(graph: &SocialGraph, v: usize) -> f64 {
    let nb = graph.neighbors(v);
    let deg = nb.len();
    if deg < 2 {
        return 0.0;
    }
    // Each neighbor-neighbor link is seen from both ends.
    let twice_links: usize = nb
        .iter()
        .map(|&u| sorted_intersection_count(graph.neighbors(u), nb))
        .sum();
    twice_links as f64 / (deg * (deg - 1)) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::String;

    fn g(edges: &[(&str, &str)]) -> SocialGraph {
        SocialGraph::from_edges(edges.iter().copied())
    }

    #[test]
    fn hits_single_edge() {
        let graph = g(&[("a", "b")]);
        let h = hits(&graph, &IterConfig::default());
        assert!(h.converged);
        assert!((h.hub[0] - 1.0).abs() < 1e-12 && h.hub[1].abs() < 1e-12);
        assert!((h.authority[1] - 1.0).abs() < 1e-12 && h.authority[0].abs() < 1e-12);
    }

    #[test]
    fn hits_complete_digraph_is_flat() {
        let names = ["a", "b", "c", "d"];
        let mut edges = Vec::new();
        for x in names {
            for y in names {
                if x != y {
                    edges.push((x, y));
                }
            }
        }
        let h = hits(&g(&edges), &IterConfig::default());
        for i in 1..4 {
            assert!((h.hub[i] - h.hub[0]).abs() < 1e-12);
            assert!((h.authority[i] - h.authority[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn edgeless_graph_scores_zero() {
        let graph = SocialGraph::from_nodes_and_edges(["a", "b"], core::iter::empty::<(&str, &str)>());
        let h = hits(&graph, &IterConfig::default());
        assert!(h.converged && h.hub.iter().chain(&h.authority).all(|&x| x == 0.0));
        let e = eigenvector_centrality(&graph, &IterConfig::default());
        assert!(e.converged && e.scores.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn eigenvector_cycle_is_flat() {
        let e = eigenvector_centrality(&g(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]), &IterConfig::default());
        assert!(e.converged);
        assert!(e.scores.iter().all(|&x| (x - 0.5).abs() < 1e-9));
    }

    #[test]
    fn eigenvector_star_center_wins() {
        let graph = g(&[("c", "l1"), ("l2", "c"), ("c", "l3"), ("l4", "c")]);
        let e = eigenvector_centrality(&graph, &IterConfig::default());
        assert!(e.converged);
        let center = graph.index_of("c").unwrap();
        // Principal eigenvector of the 5-node star: center 1/sqrt(2), leaves 1/(2 sqrt(2)).
        assert!((e.scores[center] - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
        for (i, s) in e.scores.iter().enumerate() {
            if i != center {
                assert!(*s < e.scores[center]);
                assert!((s - 0.5 * core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn isolated_node_has_zero_eigenvector() {
        let graph = SocialGraph::from_nodes_and_edges(["z"], [("a", "b"), ("b", "c")]);
        let e = eigenvector_centrality(&graph, &IterConfig::default());
        assert!(e.scores[graph.index_of("z").unwrap()] < 1e-8);
    }

    #[test]
    fn closeness_path_and_complete() {
        let path = g(&[("a", "b"), ("c", "b")]);
        assert_eq!(closeness(&path, path.index_of("b").unwrap()), 1.0);
        assert!((closeness(&path, path.index_of("a").unwrap()) - 2.0 / 3.0).abs() < 1e-15);
        let lonely = SocialGraph::from_nodes_and_edges(["z"], [("a", "b")]);
        assert_eq!(closeness(&lonely, lonely.index_of("z").unwrap()), 0.0);
        let names: Vec<String> = (0..5).map(|i| format!("n{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                edges.push((names[i].as_str(), names[j].as_str()));
            }
        }
        let k5 = SocialGraph::from_edges(edges);
        assert!((0..5).all(|v| closeness(&k5, v) == 1.0));
    }

    #[test]
    fn clustering_triangle_and_star() {
        let tri = g(&[("a", "b"), ("b", "c"), ("c", "a")]);
        assert!((0..3).all(|v| clustering_coefficient(&tri, v) == 1.0));
        let star = g(&[("c", "x"), ("c", "y"), ("z", "c")]);
        assert_eq!(clustering_coefficient(&star, star.index_of("c").unwrap()), 0.0);
        assert_eq!(clustering_coefficient(&star, star.index_of("x").unwrap()), 0.0);
    }
}
