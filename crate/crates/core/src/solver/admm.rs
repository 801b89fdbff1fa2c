use nalgebra::{Cholesky, DVector, Dyn};

use super::SolverConfig;
use crate::datagen::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{thin_svd, Matrix};

#[derive(Debug, Clone)]
pub struct DirectionSolution {
    pub direction: DVector<f64>,
    /// `‖cᵀD‖₁` evaluated on the returned direction.
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

enum Backend {
    /// Coordinates are the right singular vectors `Vᵀ` (orthonormal rows),
    /// so the Gram matrix is the identity and `c = Q Σ⁻¹ p`.
    Reduced { lift: Matrix },
    /// Coordinates are `D` itself with Gram `D Dᵀ`.
    Ambient { chol: Cholesky<f64, Dyn>, gram: Matrix },
}

/// Shared factorization for solving
/// `min ‖cᵀD‖₁ s.t. cᵀd_i = 1` for any `i`.
///
/// ADMM splitting on `x = Aᵀp` (with `A` the `r × N` coordinate matrix):
/// the `p`-update is an equality-constrained least-squares step, the
/// `z`-update is soft-thresholding at `1/ρ`, followed by the scaled dual
/// update. Stops when `‖x − z‖₂ ≤ primal_tol·√N` and
/// `ρ‖A(z − z_prev)‖₂ ≤ dual_tol·√N`.
pub struct InnovationProblem<'a> {
    data: &'a DataMatrix,
    cfg: SolverConfig,
    rank: usize,
    n: usize,
    /// Row-major `r × N`.
    rows: Vec<f64>,
    /// Row-major `N × r` (the transpose), for sparse products with `z`.
    cols: Vec<f64>,
    backend: Backend,
}

impl<'a> InnovationProblem<'a> {
    pub fn new(data: &'a DataMatrix, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let d = data.points();
        let n = d.ncols();
        let (rank, coords, backend) = if cfg.reduce_to_span {
            let svd = thin_svd(d)?;
            let r = svd.rank();
            let mut lift = svd.u.columns(0, r).into_owned();
            for k in 0..r {
                let s = svd.singular_values[k];
                lift.column_mut(k).scale_mut(1.0 / s);
            }
            let coords = svd.v.columns(0, r).transpose();
            (r, coords, Backend::Reduced { lift })
        } else {
            let svd = thin_svd(d)?;
            if svd.rank() < d.nrows() {
                return Err(Error::SingularGram);
            }
            let gram = d * d.transpose();
            let chol = Cholesky::new(gram.clone()).ok_or(Error::SingularGram)?;
            (d.nrows(), d.clone(), Backend::Ambient { chol, gram })
        };
        let mut rows = vec![0.0; rank * n];
        let mut cols = vec![0.0; rank * n];
        for k in 0..rank {
            for j in 0..n {
                rows[k * n + j] = coords[(k, j)];
                cols[j * rank + k] = coords[(k, j)];
            }
        }
        Ok(Self {
            data,
            cfg: *cfg,
            rank,
            n,
            rows,
            cols,
            backend,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn gram_solve(&self, v: &mut [f64]) {
        if let Backend::Ambient { chol, .. } = &self.backend {
            let sol = chol.solve(&DVector::from_column_slice(v));
            v.copy_from_slice(sol.as_slice());
        }
    }

    fn gram_mul(&self, p: &[f64], out: &mut [f64]) {
        match &self.backend {
            Backend::Reduced { .. } => out.copy_from_slice(p),
            Backend::Ambient { gram, .. } => {
                let r = gram * DVector::from_column_slice(p);
                out.copy_from_slice(r.as_slice());
            }
        }
    }

    fn lift(&self, p: &[f64]) -> DVector<f64> {
        match &self.backend {
            Backend::Reduced { lift } => lift * DVector::from_column_slice(p),
            Backend::Ambient { .. } => DVector::from_column_slice(p),
        }
    }

    /// `out = Aᵀ p`.
    fn at_mul(&self, p: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (k, &pk) in p.iter().enumerate() {
            let row = &self.rows[k * self.n..(k + 1) * self.n];
            for (o, &a) in out.iter_mut().zip(row) {
                *o += pk * a;
            }
        }
    }

    /// `out = A z`, skipping zero entries of `z`.
    fn a_mul_sparse(&self, z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let r = self.rank;
        for (j, &zj) in z.iter().enumerate() {
            if zj != 0.0 {
                let col = &self.cols[j * r..(j + 1) * r];
                for (o, &a) in out.iter_mut().zip(col) {
                    *o += zj * a;
                }
            }
        }
    }

    pub fn solve(&self, i: usize) -> Result<DirectionSolution> {
        let n = self.n;
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        let r = self.rank;
        let rho = self.cfg.rho;
        let thresh = 1.0 / rho;
        let sqrt_n = (n as f64).sqrt();
        let primal_eps = self.cfg.primal_tol * sqrt_n;
        let dual_eps = self.cfg.dual_tol * sqrt_n;

        let a_i: Vec<f64> = self.cols[i * r..(i + 1) * r].to_vec();
        let mut h = a_i.clone();
        self.gram_solve(&mut h);
        let hh = dot(&a_i, &h);

        let mut z = vec![0.0; n];
        let mut u = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut az = vec![0.0; r];
        let mut az_new = vec![0.0; r];
        let mut au = vec![0.0; r];
        let mut p = vec![0.0; r];
        let mut gp = vec![0.0; r];

        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=self.cfg.max_iters {
            iterations = it;
            // p-update: argmin ‖Aᵀp − (z − u)‖² s.t. a_iᵀp = 1.
            for k in 0..r {
                p[k] = az[k] - au[k];
            }
            self.gram_solve(&mut p);
            let mu = (1.0 - dot(&a_i, &p)) / hh;
            for k in 0..r {
                p[k] += mu * h[k];
            }
            self.at_mul(&p, &mut x);

            let mut primal_sq = 0.0;
            for j in 0..n {
                let w = x[j] + u[j];
                let zj = soft_threshold(w, thresh);
                z[j] = zj;
                let res = x[j] - zj;
                primal_sq += res * res;
                u[j] += res;
            }

            self.a_mul_sparse(&z, &mut az_new);
            let mut dual_sq = 0.0;
            for k in 0..r {
                let dlt = az_new[k] - az[k];
                dual_sq += dlt * dlt;
            }
            // A u_new = A u + A x − A z_new, and A x = G p.
            self.gram_mul(&p, &mut gp);
            for k in 0..r {
                au[k] += gp[k] - az_new[k];
            }
            std::mem::swap(&mut az, &mut az_new);

            if primal_sq.sqrt() <= primal_eps && rho * dual_sq.sqrt() <= dual_eps {
                converged = true;
                break;
            }
        }

        let direction = self.lift(&p);
        let objective = self.data.points().tr_mul(&direction).abs().sum();
        Ok(DirectionSolution {
            direction,
            objective,
            converged,
            iterations,
        })
    }
}

#[inline]
fn soft_threshold(w: f64, t: f64) -> f64 {
    if w > t {
        w - t
    } else if w < -t {
        w + t
    } else {
        0.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}
