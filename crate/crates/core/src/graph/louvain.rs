//! Louvain modularity optimization on the undirected view.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::SocialGraph;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Community per node index, numbered by first appearance in node order.
    pub community: Vec<usize>,
    pub modularity: f64,
}

/// Symmetric weighted adjacency. `loops[i]` holds `A_ii`, i.e. twice the
/// weight folded into node `i`.
struct Weighted {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
    degree: Vec<f64>,
    total: f64,
}

impl Weighted {
    fn from_graph(graph: &SocialGraph) -> Self {
        let n = graph.node_count();
        let adj: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|v| graph.neighbors(v).iter().map(|&u| (u, 1.0)).collect())
            .collect();
        Self::assemble(adj, vec![0.0; n])
    }

    fn assemble(adj: Vec<Vec<(usize, f64)>>, loops: Vec<f64>) -> Self {
        let degree: Vec<f64> = adj
            .iter()
            .zip(&loops)
            .map(|(row, l)| row.iter().map(|(_, w)| w).sum::<f64>() + l)
            .collect();
        let total = degree.iter().sum();
        Self {
            adj,
            loops,
            degree,
            total,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Collapse each community into one node.
    fn aggregate(&self, community: &[usize], count: usize) -> Self {
        let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
        let mut loops = vec![0.0; count];
        for v in 0..self.len() {
            let cv = community[v];
            loops[cv] += self.loops[v];
            for &(u, w) in &self.adj[v] {
                let cu = community[u];
                if cu == cv {
                    loops[cv] += w;
                } else {
                    *maps[cv].entry(cu).or_default() += w;
                }
            }
        }
        let adj = maps.into_iter().map(|m| m.into_iter().collect()).collect();
        Self::assemble(adj, loops)
    }
}

/// Renumber labels by first appearance; returns the label count.
fn renumber(labels: &mut [usize]) -> usize {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    for l in labels.iter_mut() {
        let next = map.len();
        *l = *map.entry(*l).or_insert(next);
    }
    map.len()
}

/// One local-moving phase. Returns whether any node changed community.
fn local_moves(g: &Weighted, community: &mut [usize], order: &[usize], resolution: f64) -> bool {
    let mut tot = vec![0.0; g.len()];
    for v in 0..g.len() {
        tot[community[v]] += g.degree[v];
    }
    let mut moved_any = false;
    loop {
        let mut moved = false;
        for &v in order {
            let own = community[v];
            let k = g.degree[v];
            let mut links: BTreeMap<usize, f64> = BTreeMap::new();
            links.insert(own, 0.0);
            for &(u, w) in &g.adj[v] {
                *links.entry(community[u]).or_default() += w;
            }
            tot[own] -= k;
            let gain = |c: usize, k_in: f64| k_in - resolution * tot[c] * k / g.total;
            let mut best = own;
            let mut best_gain = gain(own, links[&own]);
            for (&c, &k_in) in &links {
                let candidate = gain(c, k_in);
                if candidate > best_gain + 1e-12 {
                    best = c;
                    best_gain = candidate;
                }
            }
            tot[best] += k;
            if best != own {
                community[v] = best;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            return moved_any;
        }
    }
}

/// Two-phase Louvain (local moves, then aggregation) until a level produces
/// no move. Node visit order is the sorted id order shuffled by `seed`.
pub fn louvain(graph: &SocialGraph, resolution: f64, seed: u64) -> Partition {
    let n = graph.node_count();
    let mut assignment: Vec<usize> = (0..n).collect();
    if graph.undirected_edge_count() == 0 {
        return Partition {
            community: assignment,
            modularity: 0.0,
        };
    }
    let mut level_graph = Weighted::from_graph(graph);
    for level in 0u64.. {
        let mut community: Vec<usize> = (0..level_graph.len()).collect();
        let mut order: Vec<usize> = (0..level_graph.len()).collect();
        order.shuffle(&mut rng::rng_for(seed, level));
        if !local_moves(&level_graph, &mut community, &order, resolution) {
            break;
        }
        let count = renumber(&mut community);
        for a in assignment.iter_mut() {
            *a = community[*a];
        }
        level_graph = level_graph.aggregate(&community, count);
    }
    renumber(&mut assignment);
    let modularity = modularity(graph, &assignment, resolution);
    Partition {
        community: assignment,
        modularity,
    }
}

/// Newman modularity of a node partition on the undirected view.
pub fn modularity(graph: &SocialGraph, community: &[usize], resolution: f64) -> f64 {
    let m = graph.undirected_edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let count = community.iter().copied().max().map_or(0, |c| c + 1);
    let mut internal = vec![0.0; count];
    let mut degree = vec![0.0; count];
    for v in 0..graph.node_count() {
        let c = community[v];
        degree[c] += graph.neighbors(v).len() as f64;
        internal[c] += graph.neighbors(v).iter().filter(|&&u| community[u] == c).count() as f64;
    }
    // `internal` counts every intra-community edge from both ends.
    internal
        .iter()
        .zip(&degree)
        .map(|(i, d)| i / (2.0 * m) - resolution * (d / (2.0 * m)) * (d / (2.0 * m)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::String;

    fn cliques_joined() -> SocialGraph {
        let names: Vec<String> = (0..10).map(|i| format!("n{i}")).collect();
        let mut edges = Vec::new();
        for block in [0..5, 5..10] {
            for i in block.clone() {
                for j in block.clone() {
                    if i < j {
                        edges.push((names[i].clone(), names[j].clone()));
                    }
                }
            }
        }
        edges.push((names[4].clone(), names[5].clone()));
        SocialGraph::from_edges(edges)
    }

    #[test]
    fn two_cliques_split() {
        let g = cliques_joined();
        for seed in 0..10 {
            let p = louvain(&g, 1.0, seed);
            let first = p.community[g.index_of("n0").unwrap()];
            let second = p.community[g.index_of("n9").unwrap()];
            assert_ne!(first, second);
            for i in 0..10 {
                let want = if i < 5 { first } else { second };
                assert_eq!(p.community[g.index_of(&format!("n{i}")).unwrap()], want);
            }
            assert!(p.modularity > 0.0);
            assert!(p.modularity > modularity(&g, &[0; 10], 1.0));
        }
    }

    #[test]
    fn single_clique_is_one_community() {
        let names: Vec<String> = (0..6).map(|i| format!("k{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..6 {
            for j in i + 1..6 {
                edges.push((names[i].as_str(), names[j].as_str()));
            }
        }
        let p = louvain(&SocialGraph::from_edges(edges), 1.0, 3);
        assert!(p.community.iter().all(|&c| c == 0));
    }

    #[test]
    fn all_in_one_has_zero_modularity() {
        let g = cliques_joined();
        assert!(modularity(&g, &[0; 10], 1.0).abs() < 1e-15);
    }
}
