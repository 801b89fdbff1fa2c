use nalgebra::SymmetricEigen;

use super::kmeans::{kmeans, KMeansParams};
use super::{AffinityGraph, ClusterAssignment};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng;

const MIN_DEGREE: f64 = 1e-12;

/// Spectral embedding from the symmetric normalized Laplacian
/// `L = I − Δ^{-1/2} W Δ^{-1/2}`: eigenvectors of the `k` smallest
/// eigenvalues, rows normalized to unit length.
pub fn spectral_embedding(w: &AffinityGraph, k: usize) -> Result<Vec<Vec<f64>>> {
    let n = w.len();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let deg = w.degrees();
    if let Some(node) = deg.iter().position(|&d| d < MIN_DEGREE) {
        return Err(Error::IsolatedNode { node });
    }
    let inv_sqrt: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut lap = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            lap[(i, j)] = delta - inv_sqrt[i] * w.weights[(i, j)] * inv_sqrt[j];
        }
    }
    let eig = SymmetricEigen::try_new(lap, f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let rows = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = order[..k].iter().map(|&c| eig.eigenvectors[(i, c)]).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
            row
        })
        .collect();
    Ok(rows)
}

/// Normalized spectral clustering with k-means++ (10 restarts) on the
/// row-normalized embedding. Deterministic given the seed of `rng`.
pub fn spectral_cluster(w: &AffinityGraph, k: usize, rng: &mut Rng) -> Result<ClusterAssignment> {
    let emb = spectral_embedding(w, k)?;
    let res = kmeans(&emb, k, &KMeansParams::default(), rng);
    Ok(ClusterAssignment { labels: res.labels, k })
}
