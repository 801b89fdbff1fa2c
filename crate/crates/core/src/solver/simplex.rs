//! Exact reference solver: dense two-phase tableau simplex with Bland's rule.

use nalgebra::DVector;

use crate::datagen::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-10;
const FEAS_EPS: f64 = 1e-8;

pub const ORACLE_MAX_POINTS: usize = 200;
pub const ORACLE_MAX_DIM: usize = 50;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    /// `m` constraint rows of width `width`; last column is the RHS.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.width - 1]
    }

    fn pivot(&mut self, obj: &mut [f64], row: usize, col: usize) {
        let piv = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= piv;
        }
        let prow = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, p) in r.iter_mut().zip(&prow) {
                    *v -= f * p;
                }
            }
        }
        let f = obj[col];
        if f != 0.0 {
            for (v, p) in obj.iter_mut().zip(&prow) {
                *v -= f * p;
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule iterations over columns `< allowed`. `obj` holds the
    /// reduced costs with `-objective` in the RHS slot.
    fn run(&mut self, obj: &mut [f64], allowed: usize) -> Result<()> {
        loop {
            let Some(col) = (0..allowed).find(|&j| obj[j] < -COST_EPS) else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][col];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(obj, row, col);
        }
    }
}

/// Minimizes `costᵀx` subject to `A x = b`, `x ≥ 0`.
pub fn minimize_standard_form(cost: &[f64], a: &Matrix, b: &[f64]) -> Result<LpSolution> {
    let (m, n) = a.shape();
    if cost.len() != n || b.len() != m {
        return Err(Error::ShapeMismatch(format!(
            "cost {} / rhs {} for a {m}x{n} constraint matrix",
            cost.len(),
            b.len()
        )));
    }
    let width = n + m + 1;
    let mut t = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width];
        for j in 0..n {
            row[j] = sign * a[(i, j)];
        }
        row[n + i] = 1.0;
        row[width - 1] = sign * b[i];
        t.push(row);
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        width,
    };

    // Phase 1: minimize the sum of artificials.
    let mut obj = vec![0.0; width];
    for row in &tab.t {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[width - 1] -= row[width - 1];
    }
    tab.run(&mut obj, n + m)?;
    if -obj[width - 1] > FEAS_EPS {
        return Err(Error::Infeasible);
    }
    // Drive remaining artificials out of the basis where possible.
    for i in 0..m {
        if tab.basis[i] >= n {
            if let Some(col) = (0..n).find(|&j| tab.t[i][j].abs() > 1e-9) {
                tab.pivot(&mut obj, i, col);
            }
        }
    }

    // Phase 2 with the true costs; artificials may not re-enter.
    let mut obj = vec![0.0; width];
    obj[..n].copy_from_slice(cost);
    for i in 0..m {
        let bj = tab.basis[i];
        let cb = if bj < n { cost[bj] } else { 0.0 };
        if cb != 0.0 {
            for (v, p) in obj.iter_mut().zip(&tab.t[i]) {
                *v -= cb * p;
            }
        }
    }
    tab.run(&mut obj, n)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).max(0.0);
        }
    }
    let objective = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution { x, objective })
}

/// Global optimum of `min ‖cᵀD‖₁ s.t. cᵀd_i = 1` through the LP
/// `min Σ(u+v)  s.t.  Dᵀc = u − v,  d_iᵀc = 1,  u, v ≥ 0` with free `c`.
pub fn lp_oracle(d: &DataMatrix, i: usize) -> Result<(DVector<f64>, f64)> {
    let (m, n) = d.points().shape();
    if n > ORACLE_MAX_POINTS || m > ORACLE_MAX_DIM {
        return Err(Error::TooLarge(format!(
            "N={n} (max {ORACLE_MAX_POINTS}), M={m} (max {ORACLE_MAX_DIM})"
        )));
    }
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let pts = d.points();
    // Variables: c+ (m), c- (m), u (n), v (n).
    let nv = 2 * m + 2 * n;
    let mut a = Matrix::zeros(n + 1, nv);
    for j in 0..n {
        for k in 0..m {
            a[(j, k)] = pts[(k, j)];
            a[(j, m + k)] = -pts[(k, j)];
        }
        a[(j, 2 * m + j)] = -1.0;
        a[(j, 2 * m + n + j)] = 1.0;
    }
    for k in 0..m {
        a[(n, k)] = pts[(k, i)];
        a[(n, m + k)] = -pts[(k, i)];
    }
    let mut b = vec![0.0; n + 1];
    b[n] = 1.0;
    let mut cost = vec![0.0; nv];
    for c in cost.iter_mut().skip(2 * m) {
        *c = 1.0;
    }
    let sol = minimize_standard_form(&cost, &a, &b)?;
    let c = DVector::from_fn(m, |k, _| sol.x[k] - sol.x[m + k]);
    let objective = pts.tr_mul(&c).abs().sum();
    Ok((c, objective))
}
