//! Follower/friend graph and per-node network metrics.

mod centrality;
mod louvain;

pub use centrality::{closeness, clustering_coefficient, eigenvector_centrality, hits, Centrality, Hits, IterConfig};
pub use louvain::{louvain, modularity, Partition};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;

/// Directed follow graph. An edge `a -> b` means `a` follows `b`, so `b` is a
/// friend of `a` and `a` a follower of `b`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SocialGraph {
    ids: Vec<String>,
    index: BTreeMap<String, usize>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    undirected: Vec<Vec<usize>>,
    edge_count: usize,
    self_loops_dropped: usize,
}

impl SocialGraph {
    /// Build from `(follower, followee)` pairs. Duplicate edges collapse and
    /// self-loops are dropped (and counted). Node indices follow sorted id order.
    pub fn from_edges<S: AsRef<str>>(edges: impl IntoIterator<Item = (S, S)>) -> Self {
        Self::from_nodes_and_edges(core::iter::empty::<&str>(), edges)
    }

    /// Like [`SocialGraph::from_edges`] but also includes isolated nodes.
    pub fn from_nodes_and_edges<N: AsRef<str>, S: AsRef<str>>(
        nodes: impl IntoIterator<Item = N>,
        edges: impl IntoIterator<Item = (S, S)>,
    ) -> Self {
        let mut names: BTreeSet<String> = nodes.into_iter().map(|n| n.as_ref().into()).collect();
        let mut pairs: BTreeSet<(String, String)> = BTreeSet::new();
        let mut self_loops = 0;
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            names.insert(a.into());
            names.insert(b.into());
            if a == b {
                self_loops += 1;
            } else {
                pairs.insert((a.into(), b.into()));
            }
        }
        let ids: Vec<String> = names.into_iter().collect();
        let index: BTreeMap<String, usize> = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let n = ids.len();
        let mut out_adj = alloc::vec![Vec::new(); n];
        let mut in_adj = alloc::vec![Vec::new(); n];
        for (a, b) in &pairs {
            let (ia, ib) = (index[a], index[b]);
            out_adj[ia].push(ib);
            in_adj[ib].push(ia);
        }
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_unstable();
        }
        let undirected = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = out_adj[v].iter().chain(in_adj[v].iter()).copied().collect();
                nb.sort_unstable();
                nb.dedup();
                nb
            })
            .collect();
        Self {
            ids,
            index,
            out_adj,
            in_adj,
            undirected,
            edge_count: pairs.len(),
            self_loops_dropped: self_loops,
        }
    }

    /// Parse `follower followee` lines into a graph.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        Ok(Self::from_edges(parse_edges(text)?))
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops_dropped
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownNode(id.into()))
    }

    /// Followees (friends) of `v`.
    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    /// Followers of `v`.
    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    /// Neighbors in the undirected view, where any follow in either direction links two nodes.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.undirected[v]
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.undirected.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn has_edge(&self, a: usize, b: usize) -> bool {
        self.out_adj[a].binary_search(&b).is_ok()
    }

    /// Share of `v`'s followers that `v` follows back; 0 without followers.
    pub fn reciprocity_at(&self, v: usize) -> f64 {
        let followers = &self.in_adj[v];
        if followers.is_empty() {
            return 0.0;
        }
        let mutual = followers.iter().filter(|&&u| self.has_edge(v, u)).count();
        mutual as f64 / followers.len() as f64
    }
}

/// Parse `follower followee` lines. Blank lines and `#` comments are skipped.
pub fn parse_edges(text: &str) -> Result<Vec<(String, String)>> {
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => edges.push((a.into(), b.into())),
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected `follower followee`, got `{line}`"),
                })
            }
        }
    }
    Ok(edges)
}

pub fn reciprocity(graph: &SocialGraph, node: &str) -> Result<f64> {
    Ok(graph.reciprocity_at(graph.index_of(node)?))
}

/// Mean over mentioned users of `user_ratio - mentioned_ratio`; 0 without mentions.
pub fn power_difference(user_ratio: f64, mentioned_ratios: &[f64]) -> f64 {
    if mentioned_ratios.is_empty() {
        return 0.0;
    }
    mentioned_ratios.iter().map(|r| user_ratio - r).sum::<f64>() / mentioned_ratios.len() as f64
}

/// Every network metric of one node. `power_diff` depends on tweets and is
/// filled in during feature extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMetrics {
    pub user_id: String,
    pub friends: usize,
    pub followers: usize,
    pub ratio: f64,
    pub reciprocity: f64,
    pub hub: f64,
    pub authority: f64,
    pub eigenvector: f64,
    pub closeness: f64,
    pub clustering: f64,
    pub community_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub self_loops_dropped: usize,
    pub modularity: f64,
    pub communities: usize,
    pub hits_converged: bool,
    pub eigenvector_converged: bool,
    pub mean_reciprocity: f64,
    pub mean_clustering: f64,
}

/// All per-node metrics plus graph-level summary values.
pub fn compute_metrics(
    graph: &SocialGraph,
    config: &IterConfig,
    louvain_seed: u64,
    exec: &impl Executor,
) -> (Vec<NodeMetrics>, GraphSummary) {
    let hits = hits(graph, config);
    let eigen = eigenvector_centrality(graph, config);
    let partition = louvain(graph, 1.0, louvain_seed);
    let nodes: Vec<usize> = (0..graph.node_count()).collect();
    let local = exec.map(&nodes, |&v| (closeness(graph, v), clustering_coefficient(graph, v)));
    let metrics: Vec<NodeMetrics> = nodes
        .iter()
        .map(|&v| {
            let friends = graph.out_neighbors(v).len();
            let followers = graph.in_neighbors(v).len();
            NodeMetrics {
                user_id: graph.ids()[v].clone(),
                friends,
                followers,
                ratio: followers as f64 / friends.max(1) as f64,
                reciprocity: graph.reciprocity_at(v),
                hub: hits.hub[v],
                authority: hits.authority[v],
                eigenvector: eigen.scores[v],
                closeness: local[v].0,
                clustering: local[v].1,
                community_id: partition.community[v],
            }
        })
        .collect();
    let n = metrics.len().max(1) as f64;
    let summary = GraphSummary {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        self_loops_dropped: graph.self_loops_dropped(),
        modularity: partition.modularity,
        communities: partition.community.iter().collect::<BTreeSet<_>>().len(),
        hits_converged: hits.converged,
        eigenvector_converged: eigen.converged,
        mean_reciprocity: metrics.iter().map(|m| m.reciprocity).sum::<f64>() / n,
        mean_clustering: metrics.iter().map(|m| m.clustering).sum::<f64>() / n,
    };
    (metrics, summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    #[test]
    fn duplicate_edges_collapse() {
        let g = SocialGraph::parse_edge_list("a b\na b\n").unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn self_loops_dropped() {
        let g = SocialGraph::parse_edge_list("a a\n").unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.self_loops_dropped(), 1);
    }

    #[test]
    fn mutual_pair() {
        let g = SocialGraph::parse_edge_list("a b\nb a\n").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.undirected_edge_count(), 1);
        assert_eq!(reciprocity(&g, "b").unwrap(), 1.0);
    }

    #[test]
    fn one_way_has_no_reciprocity() {
        let g = SocialGraph::parse_edge_list("a b\n").unwrap();
        assert_eq!(reciprocity(&g, "b").unwrap(), 0.0);
        assert_eq!(reciprocity(&g, "a").unwrap(), 0.0);
        assert!(matches!(reciprocity(&g, "zz"), Err(Error::UnknownNode(_))));
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = SocialGraph::parse_edge_list("a b\n\nc\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                message: "expected `follower followee`, got `c`".into()
            }
        );
    }

    #[test]
    fn power_difference_cases() {
        assert_eq!(power_difference(2.0, &[2.0, 2.0]), 0.0);
        assert_eq!(power_difference(2.0, &[0.5]), 1.5);
        assert_eq!(power_difference(2.0, &[]), 0.0);
    }

    #[test]
    fn degrees_match_edge_recount() {
        let text = "a b\nb c\nc a\na c\nd a\n";
        let g = SocialGraph::parse_edge_list(text).unwrap();
        let (metrics, summary) = compute_metrics(&g, &IterConfig::default(), 1, &Sequential);
        for m in &metrics {
            let friends = text.lines().filter(|l| l.split(' ').next() == Some(m.user_id.as_str())).count();
            let followers = text.lines().filter(|l| l.split(' ').nth(1) == Some(m.user_id.as_str())).count();
            assert_eq!((m.friends, m.followers), (friends, followers));
            assert_eq!(m.ratio, followers as f64 / friends.max(1) as f64);
        }
        assert_eq!(summary.edges, 5);
    }
}
