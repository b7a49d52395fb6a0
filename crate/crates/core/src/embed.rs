//! Isomap projection of a shape path onto the plane.
//!
//! Pairwise shape distances feed a symmetric k-nearest-neighbour graph,
//! graph shortest paths approximate distances along the shape manifold, and
//! classical MDS lays those out in two dimensions.

use nalgebra::{DMatrix, SymmetricEigen};
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::srv::{geodesic_distance, ShapePath};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D {
    pub coords: Vec<Vec2>,
    /// Kruskal stress-1 between graph distances and embedded distances.
    pub stress: f64,
}

impl Embedding2D {
    /// Sum of distances between consecutive embedded frames.
    pub fn trajectory_length(&self) -> f64 {
        self.coords.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

/// Symmetric matrix of shape distances between all frames.
pub fn distance_matrix(path: &ShapePath) -> Result<Vec<Vec<f64>>> {
    let n = path.len();
    let shapes = path.shapes();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let dists = pairs
        .par_iter()
        .map(|&(i, j)| geodesic_distance(&shapes[i], &shapes[j]))
        .collect::<Result<Vec<f64>>>()?;
    let mut d = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(dists) {
        d[i][j] = v;
        d[j][i] = v;
    }
    Ok(d)
}

/// Shortest-path distances over the symmetric k-NN graph of `dist`.
pub fn graph_distances(dist: &[Vec<f64>], k: usize) -> Result<Vec<Vec<f64>>> {
    let n = dist.len();
    let mut graph = UnGraph::<usize, f64>::with_capacity(n, n * k);
    let nodes: Vec<NodeIndex> = (0..n).map(|i| graph.add_node(i)).collect();
    let mut adjacent = vec![vec![false; n]; n];
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| dist[i][a].total_cmp(&dist[i][b]).then(a.cmp(&b)));
        for &j in order.iter().take(k) {
            adjacent[i][j] = true;
            adjacent[j][i] = true;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacent[i][j] {
                graph.add_edge(nodes[i], nodes[j], dist[i][j]);
            }
        }
    }

    let rows: Vec<Vec<Option<f64>>> = (0..n)
        .into_par_iter()
        .map(|src| {
            let reach = dijkstra(&graph, nodes[src], None, |e| *e.weight());
            (0..n).map(|j| reach.get(&nodes[j]).copied()).collect()
        })
        .collect();

    if rows[0].iter().any(Option::is_none) {
        let mut label = vec![usize::MAX; n];
        let mut components = Vec::new();
        for i in 0..n {
            if label[i] != usize::MAX {
                continue;
            }
            let members: Vec<usize> = (0..n).filter(|&j| rows[i][j].is_some()).collect();
            for &m in &members {
                label[m] = components.len();
            }
            components.push(members);
        }
        return Err(Error::DisconnectedGraph { components });
    }
    Ok(rows
        .into_iter()
        .map(|r| r.into_iter().map(|v| v.unwrap_or(f64::INFINITY)).collect())
        .collect())
}

/// Classical MDS to two dimensions: double-centre the squared distances,
/// keep the two largest eigenpairs (negative eigenvalues truncated at 0) and
/// scale eigenvectors by √eigenvalue. Axes are flipped so frame 0 has
/// non-negative coordinates.
pub fn classical_mds(dist: &[Vec<f64>]) -> Vec<Vec2> {
    let n = dist.len();
    if n == 0 {
        return Vec::new();
    }
    let sq = DMatrix::from_fn(n, n, |i, j| dist[i][j] * dist[i][j]);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut axes = [vec![0.0; n], vec![0.0; n]];
    for (axis, &idx) in order.iter().take(2).enumerate() {
        let lambda = eig.eigenvalues[idx].max(0.0);
        let scale = lambda.sqrt();
        let v = eig.eigenvectors.column(idx);
        let mut col: Vec<f64> = (0..n).map(|i| v[i] * scale).collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        for c in &mut col {
            *c -= mean;
        }
        if col[0] < 0.0 {
            for c in &mut col {
                *c = -*c;
            }
        }
        axes[axis] = col;
    }
    (0..n).map(|i| Vec2::new(axes[0][i], axes[1][i])).collect()
}

fn kruskal_stress(target: &[Vec<f64>], coords: &[Vec2]) -> f64 {
    let n = coords.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let e = (coords[i] - coords[j]).norm();
            num += (target[i][j] - e).powi(2);
            den += target[i][j].powi(2);
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Isomap from a precomputed distance matrix.
pub fn isomap_from_distances(dist: &[Vec<f64>], k: usize) -> Result<Embedding2D> {
    let n = dist.len();
    if n < 3 {
        return Err(Error::InsufficientFrames { need: 3, got: n });
    }
    if k < 2 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "neighbour count k = {k} must satisfy 2 <= k < {n}"
        )));
    }
    let max = dist.iter().flatten().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(Embedding2D {
            coords: vec![Vec2::ZERO; n],
            stress: 0.0,
        });
    }
    let geo = graph_distances(dist, k)?;
    let coords = classical_mds(&geo);
    let stress = kruskal_stress(&geo, &coords);
    Ok(Embedding2D { coords, stress })
}

/// Default neighbourhood size min(6, N − 1).
pub fn default_k(frames: usize) -> usize {
    6.min(frames.saturating_sub(1))
}

pub fn isomap_embed(path: &ShapePath, k: usize) -> Result<Embedding2D> {
    if path.len() < 3 {
        return Err(Error::InsufficientFrames {
            need: 3,
            got: path.len(),
        });
    }
    isomap_from_distances(&distance_matrix(path)?, k)
}
