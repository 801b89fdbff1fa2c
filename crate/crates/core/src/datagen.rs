//! Union-of-subspaces data models with an explicit shared intersection.
//!
//! Every cluster basis is `[U, Û_k]`: `U` spans the intersection shared by all
//! clusters and `Û_k` is the cluster's innovation block, orthogonal to `U`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    check_finite, concat_bases, gaussian_matrix, orthonormal_basis, sample_grassmannian,
    sample_unit_sphere, Matrix, OrthonormalBasis,
};
use crate::rng::Rng;

const ORTHO_TOL: f64 = 1e-8;
const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SubspaceEnsemble {
    intersection: OrthonormalBasis,
    innovations: Vec<OrthonormalBasis>,
}

impl SubspaceEnsemble {
    pub fn ambient_dim(&self) -> usize {
        self.intersection.ambient_dim()
    }

    pub fn num_clusters(&self) -> usize {
        self.innovations.len()
    }

    pub fn intersection(&self) -> &OrthonormalBasis {
        &self.intersection
    }

    pub fn intersection_dim(&self) -> usize {
        self.intersection.dim()
    }

    pub fn innovation(&self, k: usize) -> &OrthonormalBasis {
        &self.innovations[k]
    }

    pub fn innovations(&self) -> &[OrthonormalBasis] {
        &self.innovations
    }

    /// `m_k = s + dim Û_k`.
    pub fn cluster_dim(&self, k: usize) -> usize {
        self.intersection.dim() + self.innovations[k].dim()
    }

    /// `[U, Û_k]` as a single basis.
    pub fn cluster_basis(&self, k: usize) -> OrthonormalBasis {
        let m = self.ambient_dim();
        let s = self.intersection.dim();
        let mut b = Matrix::zeros(m, self.cluster_dim(k));
        b.columns_mut(0, s).copy_from(self.intersection.matrix());
        b.columns_mut(s, self.innovations[k].dim())
            .copy_from(self.innovations[k].matrix());
        OrthonormalBasis::from_raw(b)
    }

    /// Orthonormal basis of `⊕_{i≠k} span(Û_i)`.
    pub fn other_innovations(&self, k: usize) -> Result<OrthonormalBasis> {
        let others: Vec<&OrthonormalBasis> = self
            .innovations
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, b)| b)
            .collect();
        concat_bases(self.ambient_dim(), &others)
    }

    /// Orthonormal basis of `⊕_{i≠k} S_i`; empty when there is only one cluster.
    pub fn other_clusters(&self, k: usize) -> Result<OrthonormalBasis> {
        if self.num_clusters() <= 1 {
            return Ok(OrthonormalBasis::empty(self.ambient_dim()));
        }
        let inn = self.other_innovations(k)?;
        concat_bases(self.ambient_dim(), &[&self.intersection, &inn])
    }
}

/// Columns are unit-norm data points; optional ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    points: Matrix,
    labels: Option<Vec<usize>>,
}

impl DataMatrix {
    /// Validates unit column norms (1e-10) and label length.
    pub fn new(points: Matrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if points.ncols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        check_finite(&points)?;
        for (j, c) in points.column_iter().enumerate() {
            let n = c.norm();
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::DomainError(format!("column {j} has norm {n}, expected 1")));
            }
        }
        if let Some(l) = &labels {
            if l.len() != points.ncols() {
                return Err(Error::LengthMismatch(l.len(), points.ncols()));
            }
        }
        Ok(Self { points, labels })
    }

    /// Normalizes every column to unit norm. Columns with norm below 1e-12
    /// are rejected with `DegeneratePoint`.
    pub fn from_unnormalized(mut points: Matrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if points.ncols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        check_finite(&points)?;
        for (j, mut c) in points.column_iter_mut().enumerate() {
            let n = c.norm();
            if n < 1e-12 {
                return Err(Error::DegeneratePoint { index: j });
            }
            c /= n;
        }
        Self::new(points, labels)
    }

    pub(crate) fn from_parts_unchecked(points: Matrix, labels: Option<Vec<usize>>) -> Self {
        Self { points, labels }
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != self.len() {
                return Err(Error::LengthMismatch(l.len(), self.len()));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn ambient_dim(&self) -> usize {
        self.points.nrows()
    }

    pub fn len(&self) -> usize {
        self.points.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.points.ncols() == 0
    }

    pub fn column(&self, i: usize) -> DVector<f64> {
        self.points.column(i).into_owned()
    }

    /// Columns with label `k`.
    pub fn cluster_points(&self, k: usize) -> Result<Matrix> {
        let labels = self.labels.as_ref().ok_or(Error::MissingLabels)?;
        let idx: Vec<usize> = (0..self.len()).filter(|&i| labels[i] == k).collect();
        Ok(self.points.select_columns(idx.iter()))
    }

    /// Column permutation: output column `j` is input column `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::LengthMismatch(perm.len(), self.len()));
        }
        let points = self.points.select_columns(perm.iter());
        let labels = self
            .labels
            .as_ref()
            .map(|l| perm.iter().map(|&p| l[p]).collect());
        Ok(Self { points, labels })
    }
}

fn check_random_dims(m_ambient: usize, k: usize, m: usize, s: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidDims("K must be at least 1".into()));
    }
    if !(s < m && m <= m_ambient) {
        return Err(Error::InvalidDims(format!(
            "need 0 <= s < m <= M, got s={s}, m={m}, M={m_ambient}"
        )));
    }
    if k * (m - s) + s > m_ambient {
        return Err(Error::InvalidDims(format!(
            "K(m-s)+s = {} exceeds M = {m_ambient}",
            k * (m - s) + s
        )));
    }
    Ok(())
}

/// Draws `span(U)` uniformly of dimension `s` and each `Û_k` uniformly of
/// dimension `m - s` inside the orthogonal complement of `span(U)`.
pub fn make_ensemble_fully_random(
    ambient_dim: usize,
    num_clusters: usize,
    m: usize,
    s: usize,
    rng: &mut Rng,
) -> Result<SubspaceEnsemble> {
    check_random_dims(ambient_dim, num_clusters, m, s)?;
    let intersection = sample_grassmannian(ambient_dim, s, rng)?;
    let mut innovations = Vec::with_capacity(num_clusters);
    for _ in 0..num_clusters {
        let mut g = gaussian_matrix(ambient_dim, m - s, rng);
        if s > 0 {
            // Two passes of projection keep U^T Û_k at machine precision.
            for _ in 0..2 {
                let u = intersection.matrix();
                g -= u * u.tr_mul(&g);
            }
        }
        let b = orthonormal_basis(&g)?;
        if b.dim() != m - s {
            return Err(Error::RankDeficient { block: innovations.len() + 1, rank: b.dim(), cols: m - s });
        }
        innovations.push(b);
    }
    Ok(SubspaceEnsemble {
        intersection,
        innovations,
    })
}

/// Orthonormalizes user-supplied blocks and checks `U ⟂ Û_k`.
///
/// Block index 0 in errors refers to `U`; innovation `k` is block `k + 1`.
pub fn make_ensemble_deterministic(u: &Matrix, innovations: &[Matrix]) -> Result<SubspaceEnsemble> {
    if innovations.is_empty() {
        return Err(Error::InvalidDims("need at least one innovation block".into()));
    }
    let m = u.nrows();
    let orth = |a: &Matrix, block: usize| -> Result<OrthonormalBasis> {
        if a.nrows() != m {
            return Err(Error::DimensionMismatch(format!(
                "block {block} has {} rows, expected {m}",
                a.nrows()
            )));
        }
        if a.ncols() == 0 {
            return Ok(OrthonormalBasis::empty(m));
        }
        let b = orthonormal_basis(a)?;
        if b.dim() != a.ncols() {
            return Err(Error::RankDeficient { block, rank: b.dim(), cols: a.ncols() });
        }
        Ok(b)
    };
    let intersection = orth(u, 0)?;
    let mut inn = Vec::with_capacity(innovations.len());
    for (k, a) in innovations.iter().enumerate() {
        let b = orth(a, k + 1)?;
        if intersection.dim() > 0 && b.dim() > 0 {
            let overlap = intersection.matrix().tr_mul(b.matrix()).amax();
            if overlap > ORTHO_TOL {
                return Err(Error::NotOrthogonal { block: k + 1, overlap });
            }
        }
        inn.push(b);
    }
    Ok(SubspaceEnsemble {
        intersection,
        innovations: inn,
    })
}

/// Semi-random sampling: `n_per_cluster` points per cluster with
/// coefficients uniform on the unit sphere.
pub fn sample_points(ens: &SubspaceEnsemble, n_per_cluster: usize, rng: &mut Rng) -> Result<DataMatrix> {
    let sizes = vec![n_per_cluster; ens.num_clusters()];
    sample_points_sized(ens, &sizes, rng)
}

/// As [`sample_points`] with a per-cluster point count.
pub fn sample_points_sized(ens: &SubspaceEnsemble, sizes: &[usize], rng: &mut Rng) -> Result<DataMatrix> {
    if sizes.len() != ens.num_clusters() {
        return Err(Error::LengthMismatch(sizes.len(), ens.num_clusters()));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidDims("every cluster needs at least one point".into()));
    }
    let total: usize = sizes.iter().sum();
    let mut points = Matrix::zeros(ens.ambient_dim(), total);
    let mut labels = Vec::with_capacity(total);
    let mut col = 0;
    for (k, &n) in sizes.iter().enumerate() {
        let basis = ens.cluster_basis(k);
        for _ in 0..n {
            let b = sample_unit_sphere(basis.dim(), rng)?;
            let mut d = basis.matrix() * b;
            d /= d.norm();
            points.set_column(col, &d);
            labels.push(k);
            col += 1;
        }
    }
    Ok(DataMatrix::from_parts_unchecked(points, Some(labels)))
}

/// Deterministic model: column `j` of `coefficients[k]` gives the point
/// `U_k b / ‖U_k b‖`.
pub fn sample_points_deterministic(ens: &SubspaceEnsemble, coefficients: &[Matrix]) -> Result<DataMatrix> {
    if coefficients.len() != ens.num_clusters() {
        return Err(Error::LengthMismatch(coefficients.len(), ens.num_clusters()));
    }
    let total: usize = coefficients.iter().map(|c| c.ncols()).sum();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let mut points = Matrix::zeros(ens.ambient_dim(), total);
    let mut labels = Vec::with_capacity(total);
    let mut col = 0;
    for (k, coef) in coefficients.iter().enumerate() {
        let basis = ens.cluster_basis(k);
        if coef.nrows() != basis.dim() {
            return Err(Error::ShapeMismatch(format!(
                "cluster {k}: coefficient rows {} != subspace dim {}",
                coef.nrows(),
                basis.dim()
            )));
        }
        check_finite(coef)?;
        for (j, b) in coef.column_iter().enumerate() {
            if b.norm() < 1e-12 {
                return Err(Error::ZeroCoefficient { cluster: k, column: j });
            }
            let mut d = basis.matrix() * b;
            d /= d.norm();
            points.set_column(col, &d);
            labels.push(k);
            col += 1;
        }
    }
    Ok(DataMatrix::from_parts_unchecked(points, Some(labels)))
}

/// Canonical ensemble used across tests and presets: `U = [e_0..e_{s-1}]`,
/// `Û_k` the next `m - s` coordinate vectors for each cluster in turn.
pub fn canonical_ensemble(ambient_dim: usize, num_clusters: usize, m: usize, s: usize) -> Result<SubspaceEnsemble> {
    check_random_dims(ambient_dim, num_clusters, m, s)?;
    let u = Matrix::identity(ambient_dim, ambient_dim).columns(0, s).into_owned();
    let inn: Vec<Matrix> = (0..num_clusters)
        .map(|k| {
            Matrix::identity(ambient_dim, ambient_dim)
                .columns(s + k * (m - s), m - s)
                .into_owned()
        })
        .collect();
    make_ensemble_deterministic(&u, &inn)
}

/// Summary of an ensemble suitable for reports.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EnsembleShape {
    pub ambient_dim: usize,
    pub num_clusters: usize,
    pub intersection_dim: usize,
    pub innovation_dims: Vec<usize>,
}

impl From<&SubspaceEnsemble> for EnsembleShape {
    fn from(e: &SubspaceEnsemble) -> Self {
        Self {
            ambient_dim: e.ambient_dim(),
            num_clusters: e.num_clusters(),
            intersection_dim: e.intersection_dim(),
            innovation_dims: e.innovations.iter().map(|b| b.dim()).collect(),
        }
    }
}
