//! Dense linear-algebra primitives: orthonormal bases, principal angles,
//! thin SVD and the Gaussian samplers used by the data models.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng::Rng;

pub type Matrix = DMatrix<f64>;

/// Relative singular-value threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// Columns form an orthonormal basis of a subspace of `R^M`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    basis: Matrix,
}

impl OrthonormalBasis {
    /// Wraps `basis` after checking `basis^T basis = I` within 1e-10.
    pub fn new(basis: Matrix) -> Result<Self> {
        check_finite(&basis)?;
        let gram = basis.transpose() * &basis;
        let d = basis.ncols();
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - target).abs() > 1e-10 {
                    return Err(Error::DomainError(format!(
                        "columns are not orthonormal (gram[{i},{j}] = {})",
                        gram[(i, j)]
                    )));
                }
            }
        }
        Ok(Self { basis })
    }

    pub(crate) fn from_raw(basis: Matrix) -> Self {
        Self { basis }
    }

    /// The zero-dimensional subspace of `R^ambient_dim`.
    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            basis: Matrix::zeros(ambient_dim, 0),
        }
    }

    /// First `d` coordinate vectors of `R^ambient_dim`.
    pub fn coordinate(ambient_dim: usize, d: usize) -> Result<Self> {
        if d > ambient_dim {
            return Err(Error::InvalidDims(format!("d={d} > M={ambient_dim}")));
        }
        Ok(Self {
            basis: Matrix::identity(ambient_dim, d),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.basis
    }

    pub fn into_matrix(self) -> Matrix {
        self.basis
    }

    pub fn projector(&self) -> Matrix {
        &self.basis * self.basis.transpose()
    }

    /// Coordinates `basis^T v`.
    pub fn coordinates(&self, v: &DVector<f64>) -> DVector<f64> {
        self.basis.tr_mul(v)
    }

    /// `‖basis^T v‖₂`; for unit `v` this is the cosine of the angle between
    /// `v` and the subspace.
    pub fn projection_norm(&self, v: &DVector<f64>) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.coordinates(v).norm()
    }

    /// `(I - basis basis^T) v`.
    pub fn residual(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.dim() == 0 {
            return v.clone();
        }
        v - &self.basis * self.coordinates(v)
    }

    /// Orthonormal basis of the span of `self` and `other` together.
    pub fn direct_sum(&self, other: &OrthonormalBasis) -> Result<OrthonormalBasis> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.ambient_dim(),
                other.ambient_dim()
            )));
        }
        concat_bases(self.ambient_dim(), &[self, other])
    }
}

/// Orthonormal basis for the span of all columns of `blocks`.
pub fn concat_bases(ambient_dim: usize, blocks: &[&OrthonormalBasis]) -> Result<OrthonormalBasis> {
    let total: usize = blocks.iter().map(|b| b.dim()).sum();
    if total == 0 {
        return Ok(OrthonormalBasis::empty(ambient_dim));
    }
    let mut stacked = Matrix::zeros(ambient_dim, total);
    let mut col = 0;
    for b in blocks {
        if b.ambient_dim() != ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                b.ambient_dim(),
                ambient_dim
            )));
        }
        stacked.columns_mut(col, b.dim()).copy_from(b.matrix());
        col += b.dim();
    }
    orthonormal_basis(&stacked)
}

pub fn check_finite(a: &Matrix) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Thin singular value decomposition `A = U diag(σ) Vᵀ` with `σ` descending.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// `rows × k` left singular vectors, `k = min(rows, cols)`.
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    /// `cols × k` right singular vectors.
    pub v: Matrix,
}

impl ThinSvd {
    /// Number of singular values above `RANK_TOL × σ_max`.
    pub fn rank(&self) -> usize {
        numerical_rank(&self.singular_values)
    }
}

pub fn numerical_rank(singular_values: &[f64]) -> usize {
    let smax = singular_values.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    singular_values
        .iter()
        .take_while(|&&s| s > RANK_TOL * smax)
        .count()
}

pub fn thin_svd(a: &Matrix) -> Result<ThinSvd> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    check_finite(a)?;
    if a.nrows() >= a.ncols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.transpose())?;
        Ok(ThinSvd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        })
    }
}

fn svd_tall(a: &Matrix) -> Result<ThinSvd> {
    let (rows, cols) = a.shape();
    // Householder QR, then one-sided Jacobi on the square R factor.
    let qr = a.clone().qr();
    let (ur, sigma, v) = jacobi_svd(qr.r())?;
    let u = qr.q() * ur;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    let k = sigma.len();
    let mut us = Matrix::zeros(rows, k);
    let mut vs = Matrix::zeros(cols, k);
    let mut ss = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        us.set_column(dst, &u.column(src));
        vs.set_column(dst, &v.column(src));
        ss.push(sigma[src]);
    }
    Ok(ThinSvd {
        u: us,
        singular_values: ss,
        v: vs,
    })
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD of a square matrix: rotate column pairs
/// until all are mutually orthogonal to working precision. Column norms are
/// the singular values; normalized columns are the left vectors, orthogonal
/// to relative precision even when the values are small. Columns below
/// `ε‖W‖_F` are rounding noise: they are left out of the rotations, reported
/// as zero, and get left vectors completed from the standard basis.
///
/// nalgebra's bidiagonal SVD can return a factorization that does not
/// reconstruct its input on rank-deficient matrices, hence this routine.
fn jacobi_svd(mut w: Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let n = w.ncols();
    let mut v = Matrix::identity(n, n);
    let negligible = (f64::EPSILON * w.norm()).powi(2);
    let mut done = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if done {
            break;
        }
        done = true;
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = w.column(p).dot(&w.column(q));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                done = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
    }
    if !done {
        return Err(Error::NoConvergence);
    }
    let mut sigma: Vec<f64> = w.column_iter().map(|c| c.norm()).collect();
    let mut zero = Vec::new();
    for (j, sj) in sigma.iter_mut().enumerate() {
        if *sj * *sj <= negligible {
            *sj = 0.0;
        }
        let sj = *sj;
        if sj > 0.0 {
            w.column_mut(j).scale_mut(1.0 / sj);
        } else {
            zero.push(j);
        }
    }
    complete_columns(&mut w, &zero);
    Ok((w, sigma, v))
}

fn rotate(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let (a, b) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * a - s * b;
        m[(i, q)] = s * a + c * b;
    }
}

/// Fills the listed columns with unit vectors orthogonal to every other
/// column, drawing candidates from the standard basis.
fn complete_columns(u: &mut Matrix, missing: &[usize]) {
    let rows = u.nrows();
    let mut filled: Vec<usize> = (0..u.ncols()).filter(|j| !missing.contains(j)).collect();
    let mut candidate = 0;
    for &j in missing {
        while candidate < rows {
            let mut e = DVector::zeros(rows);
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for &f in &filled {
                    let proj = u.column(f).dot(&e);
                    e -= u.column(f) * proj;
                }
            }
            let n = e.norm();
            if n > 0.5 {
                u.set_column(j, &(e / n));
                filled.push(j);
                break;
            }
        }
    }
}

/// Singular values only, descending.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    Ok(thin_svd(a)?.singular_values)
}

/// Orthonormal basis of the column space of `a`, with dimension equal to
/// its numerical rank.
pub fn orthonormal_basis(a: &Matrix) -> Result<OrthonormalBasis> {
    let svd = thin_svd(a)?;
    let r = svd.rank();
    Ok(OrthonormalBasis::from_raw(svd.u.columns(0, r).into_owned()))
}

/// Cosines of the principal angles between two subspaces, descending and
/// clamped to `[0, 1]`. The first entry is `aff_∞`.
pub fn principal_angle_cosines(a: &OrthonormalBasis, b: &OrthonormalBasis) -> Result<Vec<f64>> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ambient dims {} and {}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    if a.dim() == 0 || b.dim() == 0 {
        return Ok(Vec::new());
    }
    let cross = a.matrix().tr_mul(b.matrix());
    let s = singular_values(&cross)?;
    Ok(s.into_iter().map(|x| x.clamp(0.0, 1.0)).collect())
}

/// Cosine of the smallest principal angle; zero when either subspace is empty.
pub fn aff_inf(a: &OrthonormalBasis, b: &OrthonormalBasis) -> Result<f64> {
    Ok(principal_angle_cosines(a, b)?.first().copied().unwrap_or(0.0))
}

/// Root-mean-square principal-angle cosine.
pub fn aff_rms(a: &OrthonormalBasis, b: &OrthonormalBasis) -> Result<f64> {
    let c = principal_angle_cosines(a, b)?;
    if c.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = c.iter().map(|x| x * x).sum();
    Ok((sum / c.len() as f64).sqrt())
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    // Column-major fill so the draw order is fixed.
    Matrix::from_fn(rows, cols, |_, _| rng.normal())
}

/// Uniformly distributed `d`-dimensional subspace of `R^M`.
pub fn sample_grassmannian(ambient_dim: usize, d: usize, rng: &mut Rng) -> Result<OrthonormalBasis> {
    if d > ambient_dim {
        return Err(Error::InvalidDims(format!("d={d} > M={ambient_dim}")));
    }
    if d == 0 {
        return Ok(OrthonormalBasis::empty(ambient_dim));
    }
    let g = gaussian_matrix(ambient_dim, d, rng);
    let basis = orthonormal_basis(&g)?;
    debug_assert_eq!(basis.dim(), d);
    Ok(basis)
}

pub fn sample_unit_sphere(m: usize, rng: &mut Rng) -> Result<DVector<f64>> {
    if m < 1 {
        return Err(Error::InvalidDims("sphere dimension must be at least 1".into()));
    }
    loop {
        let v = DVector::from_fn(m, |_, _| rng.normal());
        let n = v.norm();
        if n > 1e-300 {
            return Ok(v / n);
        }
    }
}
