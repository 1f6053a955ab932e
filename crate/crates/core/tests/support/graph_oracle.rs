//! Dense reference implementations of the graph metrics.

use meanbirds_core::graph::SocialGraph;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_graph(seed: u64) -> SocialGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=100);
    let p = rng.random_range(0.01..0.15);
    let names: Vec<String> = (0..n).map(|i| format!("v{i:03}")).collect();
    let mut edges = Vec::new();
    for a in &names {
        for b in &names {
            if a != b && rng.random_bool(p) {
                edges.push((a.as_str(), b.as_str()));
            }
        }
    }
    SocialGraph::from_nodes_and_edges(&names, edges)
}

pub fn directed(g: &SocialGraph) -> DMatrix<f64> {
    let n = g.node_count();
    DMatrix::from_fn(n, n, |i, j| if g.out_neighbors(i).contains(&j) { 1.0 } else { 0.0 })
}

pub fn undirected(g: &SocialGraph) -> DMatrix<f64> {
    let a = directed(g);
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].max(a[(j, i)]))
}

/// Limit of power iteration on a symmetric matrix whose top eigenvalue also
/// dominates in magnitude: the start vector projected onto the eigenspace of
/// the largest eigenvalue, normalized. Zero if the projection vanishes.
pub fn dominant_projection(m: &DMatrix<f64>, start: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let top = eig.eigenvalues.max();
    let scale = top.abs().max(1.0);
    let mut proj = DVector::zeros(m.nrows());
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if (top - lambda).abs() <= 1e-9 * scale {
            let v = eig.eigenvectors.column(k);
            proj += v * v.dot(start);
        }
    }
    let norm = proj.norm();
    if norm > 1e-12 {
        proj / norm
    } else {
        proj
    }
}

/// (hub, authority). The iteration starts from a uniform hub vector, so the
/// authority limit projects `A^T u` and the hub limit projects `A A^T u`.
pub fn hits(g: &SocialGraph) -> (Vec<f64>, Vec<f64>) {
    let n = g.node_count();
    let a = directed(g);
    if a.sum() == 0.0 {
        return (vec![0.0; n], vec![0.0; n]);
    }
    let u = DVector::from_element(n, 1.0);
    let ata = a.transpose() * &a;
    let aat = &a * a.transpose();
    let auth = dominant_projection(&ata, &(a.transpose() * &u));
    let hub = dominant_projection(&aat, &(&aat * &u));
    (hub.iter().copied().collect(), auth.iter().copied().collect())
}

pub fn eigenvector(g: &SocialGraph) -> Vec<f64> {
    let n = g.node_count();
    let a = undirected(g);
    if a.sum() == 0.0 {
        return vec![0.0; n];
    }
    let shifted = &a + DMatrix::identity(n, n);
    dominant_projection(&shifted, &DVector::from_element(n, 1.0)).iter().copied().collect()
}

/// All-pairs hop distances by Floyd-Warshall; `None` for unreachable pairs.
pub fn distances(g: &SocialGraph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let a = undirected(g);
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
        for j in 0..n {
            if a[(i, j)] > 0.0 {
                d[i][j] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|cur| x + y < cur) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

pub fn closeness(g: &SocialGraph) -> Vec<f64> {
    distances(g)
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let reached: Vec<usize> = row.iter().enumerate().filter(|&(j, _)| j != i).filter_map(|(_, d)| *d).collect();
            let total: usize = reached.iter().sum();
            if total == 0 {
                0.0
            } else {
                reached.len() as f64 / total as f64
            }
        })
        .collect()
}

/// Triangles through each node from the cube of the adjacency matrix.
pub fn clustering(g: &SocialGraph) -> Vec<f64> {
    let a = undirected(g);
    let cube = &a * &a * &a;
    (0..a.nrows())
        .map(|i| {
            let deg = a.row(i).sum();
            if deg < 2.0 {
                0.0
            } else {
                cube[(i, i)] / (deg * (deg - 1.0))
            }
        })
        .collect()
}
