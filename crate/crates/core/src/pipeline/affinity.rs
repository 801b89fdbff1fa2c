use serde::{Deserialize, Serialize};

use crate::datagen::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::solver::DirectionSet;

/// Symmetric, nonnegative, zero-diagonal affinity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityGraph {
    pub weights: Matrix,
    pub sparsify_q: usize,
}

impl AffinityGraph {
    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.nrows() == 0
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.weights.row_iter().map(|r| r.sum()).collect()
    }

    /// Split of total weight into within-cluster and cross-cluster parts.
    pub fn mass_split(&self, labels: &[usize]) -> Result<AffinityMass> {
        if labels.len() != self.len() {
            return Err(Error::LengthMismatch(labels.len(), self.len()));
        }
        let mut within = 0.0;
        let mut cross = 0.0;
        for i in 0..self.len() {
            for j in 0..self.len() {
                let w = self.weights[(i, j)];
                if labels[i] == labels[j] {
                    within += w;
                } else {
                    cross += w;
                }
            }
        }
        Ok(AffinityMass { within, cross })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityMass {
    pub within: f64,
    pub cross: f64,
}

impl AffinityMass {
    /// `‖W_cross‖₁ / ‖W‖₁`.
    pub fn cross_ratio(&self) -> f64 {
        let total = self.within + self.cross;
        if total > 0.0 {
            self.cross / total
        } else {
            0.0
        }
    }
}

/// Zeroes the diagonal of `raw` (absolute values), keeps the `q` largest
/// entries of each row, and returns `W + Wᵀ`.
pub fn sparsify_symmetrize(mut raw: Matrix, q: usize) -> Result<AffinityGraph> {
    if q == 0 {
        return Err(Error::DomainError("q must be at least 1".into()));
    }
    let n = raw.nrows();
    if raw.ncols() != n {
        return Err(Error::ShapeMismatch(format!("affinity must be square, got {n}x{}", raw.ncols())));
    }
    raw.iter_mut().for_each(|x| *x = x.abs());
    for i in 0..n {
        raw[(i, i)] = 0.0;
        if q < n {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| raw[(i, b)].total_cmp(&raw[(i, a)]).then(a.cmp(&b)));
            for &j in &order[q..] {
                raw[(i, j)] = 0.0;
            }
        }
    }
    let weights = &raw + raw.transpose();
    Ok(AffinityGraph { weights, sparsify_q: q })
}

/// `W₀ = |C*ᵀD|`, sparsified to the `q` dominant entries per row, then
/// symmetrized.
pub fn build_affinity(dirs: &DirectionSet, d: &DataMatrix, q: usize) -> Result<AffinityGraph> {
    let (m, n) = d.points().shape();
    if dirs.directions.shape() != (m, n) {
        return Err(Error::ShapeMismatch(format!(
            "directions {:?} vs data {:?}",
            dirs.directions.shape(),
            (m, n)
        )));
    }
    sparsify_symmetrize(dirs.directions.tr_mul(d.points()), q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn keeps_top_q_after_zeroing_diagonal() {
        let mut raw = Matrix::zeros(4, 4);
        for (j, v) in [1.0, 0.6, 0.0, 0.3].iter().enumerate() {
            raw[(0, j)] = *v;
        }
        let g = sparsify_symmetrize(raw.clone(), 2).unwrap();
        // Row 0 of W₀ is [0, 0.6, 0, 0.3]; other rows are zero.
        assert_eq!(g.weights[(0, 0)], 0.0);
        assert_eq!(g.weights[(0, 1)], 0.6);
        assert_eq!(g.weights[(0, 2)], 0.0);
        assert_eq!(g.weights[(0, 3)], 0.3);
        assert_eq!(g.weights[(1, 0)], 0.6);
    }

    #[test]
    fn invariants_on_random_input() {
        let mut rng = Rng::new(4);
        for q in [1, 2, 5, 12] {
            let raw = Matrix::from_fn(10, 10, |_, _| rng.normal());
            let g = sparsify_symmetrize(raw, q).unwrap();
            for i in 0..10 {
                assert_eq!(g.weights[(i, i)], 0.0);
                for j in 0..10 {
                    assert!(g.weights[(i, j)] >= 0.0);
                    assert!((g.weights[(i, j)] - g.weights[(j, i)]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_q_and_shape() {
        assert!(sparsify_symmetrize(Matrix::zeros(3, 3), 0).is_err());
        assert!(sparsify_symmetrize(Matrix::zeros(3, 2), 1).is_err());
    }

    #[test]
    fn mass_split() {
        let w = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 0.5, 1.0, 0.0, 0.0, 0.5, 0.0, 0.0]);
        let g = AffinityGraph { weights: w, sparsify_q: 3 };
        let m = g.mass_split(&[0, 0, 1]).unwrap();
        assert_eq!(m.within, 2.0);
        assert_eq!(m.cross, 1.0);
        assert!((m.cross_ratio() - 1.0 / 3.0).abs() < 1e-15);
    }
}
