use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { histogram: Vec<u32> },
}

/// Decision tree stored as a node array with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

pub(crate) fn entropy(counts: &[u32], total: u32) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = f64::from(total);
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = f64::from(c) / t;
            -p * libm::log2(p)
        })
        .sum()
}

fn histogram(y: &[usize], idx: &[usize], n_classes: usize) -> Vec<u32> {
    let mut h = vec![0u32; n_classes];
    for &i in idx {
        h[y[i]] += 1;
    }
    h
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Best threshold for one feature, or `None` when it is constant over `idx`.
fn best_threshold(
    x: &[Vec<f64>],
    y: &[usize],
    idx: &[usize],
    feature: usize,
    parent: &[u32],
    parent_entropy: f64,
) -> Option<Candidate> {
    let mut pairs: Vec<(f64, usize)> = idx.iter().map(|&i| (x[i][feature], y[i])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = pairs.len() as u32;
    let mut left = vec![0u32; parent.len()];
    let mut best: Option<Candidate> = None;
    for i in 0..pairs.len() - 1 {
        left[pairs[i].1] += 1;
        let (a, b) = (pairs[i].0, pairs[i + 1].0);
        if a == b {
            continue;
        }
        let nl = (i + 1) as u32;
        let right: Vec<u32> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
        let children = (f64::from(nl) * entropy(&left, nl) + f64::from(n - nl) * entropy(&right, n - nl)) / f64::from(n);
        let gain = parent_entropy - children;
        if best.as_ref().is_none_or(|c| gain > c.gain) {
            let mid = a / 2.0 + b / 2.0;
            // Adjacent floats can round the midpoint up onto `b`.
            let threshold = if mid < b && mid >= a { mid } else { a };
            best = Some(Candidate {
                feature,
                threshold,
                gain,
            });
        }
    }
    best
}

impl Tree {
    /// Grow a tree on the rows listed in `idx` (duplicates allowed).
    ///
    /// At each node `mtry` features are drawn without replacement and the
    /// split with the highest information gain wins. If every drawn feature is
    /// constant, the remaining features are tried in the same random order.
    /// Nodes become leaves when pure, when every feature is constant, or at
    /// `max_depth`.
    pub fn grow<R: Rng>(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        idx: Vec<usize>,
        mtry: usize,
        max_depth: Option<usize>,
        rng: &mut R,
    ) -> Self {
        let width = x.first().map_or(0, Vec::len);
        let mut nodes: Vec<Node> = Vec::new();
        let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, idx, 0)];
        nodes.push(Node::Leaf { histogram: Vec::new() });
        let mut order: Vec<usize> = (0..width).collect();
        while let Some((slot, rows, depth)) = stack.pop() {
            let hist = histogram(y, &rows, n_classes);
            let pure = hist.iter().filter(|&&c| c > 0).count() <= 1;
            if pure || max_depth.is_some_and(|d| depth >= d) {
                nodes[slot] = Node::Leaf { histogram: hist };
                continue;
            }
            let parent_entropy = entropy(&hist, rows.len() as u32);
            order.shuffle(rng);
            let mut best: Option<Candidate> = None;
            for (k, &f) in order.iter().enumerate() {
                if k >= mtry && best.is_some() {
                    break;
                }
                if let Some(c) = best_threshold(x, y, &rows, f, &hist, parent_entropy) {
                    if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                        best = Some(c);
                    }
                }
            }
            let Some(split) = best else {
                nodes[slot] = Node::Leaf { histogram: hist };
                continue;
            };
            let (l, r): (Vec<usize>, Vec<usize>) =
                rows.into_iter().partition(|&i| x[i][split.feature] <= split.threshold);
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { histogram: Vec::new() });
            nodes.push(Node::Leaf { histogram: Vec::new() });
            nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            stack.push((right, r, depth + 1));
            stack.push((left, l, depth + 1));
        }
        Self { nodes }
    }

    /// Class histogram of the leaf reached by `x`.
    pub fn leaf(&self, x: &[f64]) -> &[u32] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { histogram } => return histogram,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[4, 0], 4), 0.0);
        assert_eq!(entropy(&[2, 2], 4), 1.0);
        assert!((entropy(&[1, 1, 1, 1], 4) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn learns_xor_with_zero_gain_first_split() {
        let x = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = vec![0, 1, 1, 0];
        let tree = Tree::grow(&x, &y, 2, (0..4).collect(), 1, None, &mut rng_for(1, 0));
        for (row, &label) in x.iter().zip(&y) {
            let h = tree.leaf(row);
            assert_eq!(h.iter().position(|&c| c > 0), Some(label));
        }
        assert_eq!(tree.depth(), 2);
    }

    #[test]
    fn constant_features_make_a_leaf() {
        let x = vec![vec![1.0]; 3];
        let y = vec![0, 1, 1];
        let tree = Tree::grow(&x, &y, 2, (0..3).collect(), 1, None, &mut rng_for(1, 0));
        assert_eq!(tree.nodes, vec![Node::Leaf { histogram: vec![1, 2] }]);
    }

    #[test]
    fn adjacent_float_threshold_separates() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let x = vec![vec![a], vec![b]];
        let tree = Tree::grow(&x, &[0, 1], 2, vec![0, 1], 1, None, &mut rng_for(1, 0));
        assert_eq!(tree.leaf(&[a]), &[1, 0]);
        assert_eq!(tree.leaf(&[b]), &[0, 1]);
    }

    #[test]
    fn depth_limit_is_respected() {
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![f64::from(i)]).collect();
        let y: Vec<usize> = (0..16).map(|i| i % 2).collect();
        let tree = Tree::grow(&x, &y, 2, (0..16).collect(), 1, Some(2), &mut rng_for(1, 0));
        assert!(tree.depth() <= 2);
    }
}
