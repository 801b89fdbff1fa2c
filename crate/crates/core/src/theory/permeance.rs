//! Estimates of `inf` and `sup` of `‖δᵀD_k‖₁` over unit `δ` in a cluster's span.
//!
//! The infimum is a nonconvex problem in general. For intrinsic dimension 2
//! an angle grid is used; above that, projected subgradient descent from
//! random starts followed by a vertex polish (the minimum of a sum of
//! absolute values on the sphere sits where `m − 1` terms vanish). The
//! supremum uses the sign fixed-point ascent `δ ← Bσ / ‖Bσ‖`.

use nalgebra::{DVector, SymmetricEigen};

use crate::datagen::{DataMatrix, SubspaceEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, OrthonormalBasis};
use crate::rng::Rng;

pub const DEFAULT_RESTARTS: usize = 32;
pub const GRID_POINTS: usize = 10_000;
const SPAN_TOL: f64 = 1e-8;
const DESCENT_ITERS: usize = 300;
const ASCENT_ITERS: usize = 100;
const INTERNAL_SEED: u64 = 0x7065_726d;

fn objective(coords: &Matrix, delta: &DVector<f64>) -> f64 {
    coords.tr_mul(delta).iter().map(|x| x.abs()).sum()
}

fn signs(coords: &Matrix, delta: &DVector<f64>) -> DVector<f64> {
    coords.tr_mul(delta).map(|x| if x >= 0.0 { 1.0 } else { -1.0 })
}

fn random_unit(m: usize, rng: &mut Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(m, |_, _| rng.normal());
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Unit vector orthogonal to the chosen columns (eigenvector of the
/// smallest eigenvalue of `B_S B_Sᵀ`).
fn null_direction(coords: &Matrix, cols: &[usize]) -> Option<DVector<f64>> {
    let m = coords.nrows();
    let mut gram = Matrix::zeros(m, m);
    for &j in cols {
        let c = coords.column(j);
        gram += c * c.transpose();
    }
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 0)?;
    let idx = eig.eigenvalues.imin();
    let v = eig.eigenvectors.column(idx).into_owned();
    let n = v.norm();
    (n > 0.0).then(|| v / n)
}

fn polish_vertex(coords: &Matrix, delta: &DVector<f64>) -> Option<DVector<f64>> {
    let m = coords.nrows();
    let proj = coords.tr_mul(delta);
    let mut order: Vec<usize> = (0..coords.ncols()).collect();
    order.sort_by(|&a, &b| proj[a].abs().total_cmp(&proj[b].abs()).then(a.cmp(&b)));
    order.truncate((m - 1).min(coords.ncols()));
    null_direction(coords, &order)
}

/// `(min, max)` of `‖δᵀB‖₁` over `δ = (cos θ, sin θ)`, `θ` on a uniform
/// grid of [`GRID_POINTS`] angles in `[0, π)`. `coords` must have 2 rows.
pub fn permeance_grid(coords: &Matrix) -> Result<(f64, f64)> {
    if coords.nrows() != 2 {
        return Err(Error::InvalidDims(format!("angle grid needs 2 rows, got {}", coords.nrows())));
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for j in 0..GRID_POINTS {
        let th = std::f64::consts::PI * j as f64 / GRID_POINTS as f64;
        let (s, c) = th.sin_cos();
        let f: f64 = coords.column_iter().map(|b| (c * b[0] + s * b[1]).abs()).sum();
        lo = lo.min(f);
        hi = hi.max(f);
    }
    Ok((lo, hi))
}

/// Multi-start local search. The first value upper-bounds the true infimum
/// and the second lower-bounds the true supremum.
pub fn permeance_local_search(coords: &Matrix, restarts: usize, rng: &mut Rng) -> Result<(f64, f64)> {
    let m = coords.nrows();
    if m == 0 || coords.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    if m == 1 {
        let f = coords.iter().map(|x| x.abs()).sum();
        return Ok((f, f));
    }
    let mut h1 = f64::INFINITY;
    let mut h2: f64 = 0.0;
    for _ in 0..restarts.max(1) {
        let start = random_unit(m, rng);

        let mut delta = start.clone();
        let mut best = (objective(coords, &delta), delta.clone());
        for t in 0..DESCENT_ITERS {
            let mut g = coords * signs(coords, &delta);
            g -= &delta * g.dot(&delta);
            let gn = g.norm();
            if gn < 1e-14 {
                break;
            }
            let step = 0.5 / ((t + 1) as f64).sqrt();
            delta -= g * (step / gn);
            delta /= delta.norm();
            let f = objective(coords, &delta);
            if f < best.0 {
                best = (f, delta.clone());
            }
        }
        if let Some(v) = polish_vertex(coords, &best.1) {
            best.0 = best.0.min(objective(coords, &v));
        }
        h1 = h1.min(best.0);

        let mut delta = start;
        let mut sigma = signs(coords, &delta);
        for _ in 0..ASCENT_ITERS {
            let v = coords * &sigma;
            let n = v.norm();
            if n == 0.0 {
                break;
            }
            delta = v / n;
            let next = signs(coords, &delta);
            if next == sigma {
                break;
            }
            sigma = next;
        }
        h2 = h2.max(objective(coords, &delta));
    }
    Ok((h1, h2))
}

/// `(h1_est, h2_est)` for the points `d_k` (columns) of one cluster whose
/// span is `basis`.
pub fn permeance_estimate(d_k: &Matrix, basis: &OrthonormalBasis, restarts: usize) -> Result<(f64, f64)> {
    if d_k.nrows() != basis.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "points in R^{}, basis in R^{}",
            d_k.nrows(),
            basis.ambient_dim()
        )));
    }
    if basis.dim() == 0 || d_k.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let coords = basis.matrix().tr_mul(d_k);
    let residual = (d_k - basis.matrix() * &coords)
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if residual > SPAN_TOL {
        return Err(Error::NotInSpan(residual));
    }
    if basis.dim() == 2 {
        permeance_grid(&coords)
    } else {
        permeance_local_search(&coords, restarts, &mut Rng::new(INTERNAL_SEED))
    }
}

/// Minimum of the per-cluster infimum estimates and maximum of the
/// per-cluster supremum estimates, each cluster taken in `[U, Û_k]`.
pub fn ensemble_permeance(ens: &SubspaceEnsemble, d: &DataMatrix, restarts: usize) -> Result<(f64, f64)> {
    if d.labels().is_none() {
        return Err(Error::MissingLabels);
    }
    let mut h1 = f64::INFINITY;
    let mut h2: f64 = 0.0;
    for k in 0..ens.num_clusters() {
        let pts = d.cluster_points(k)?;
        if pts.ncols() == 0 {
            continue;
        }
        let (a, b) = permeance_estimate(&pts, &ens.cluster_basis(k), restarts)?;
        h1 = h1.min(a);
        h2 = h2.max(b);
    }
    if h1.is_infinite() {
        return Err(Error::EmptyMatrix);
    }
    Ok((h1, h2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sample_grassmannian;

    #[test]
    fn two_dim_examples() {
        let b = OrthonormalBasis::coordinate(2, 2).unwrap();
        let (h1, h2) = permeance_estimate(&Matrix::identity(2, 2), &b, 32).unwrap();
        assert!((h1 - 1.0).abs() < 1e-12);
        assert!((h2 - 2f64.sqrt()).abs() < 1e-8);
        let single = Matrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let (h1, h2) = permeance_estimate(&single, &b, 32).unwrap();
        assert!(h1.abs() < 1e-12);
        assert!((h2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_search_agrees_with_grid_in_plane() {
        for seed in 0..5 {
            let mut rng = Rng::new(seed);
            let coords = Matrix::from_fn(2, 10, |_, _| rng.normal());
            let coords = Matrix::from_columns(
                &coords.column_iter().map(|c| c / c.norm()).collect::<Vec<_>>(),
            );
            let grid = permeance_grid(&coords).unwrap();
            let local = permeance_local_search(&coords, 32, &mut Rng::new(99)).unwrap();
            assert!((grid.0 - local.0).abs() < 1e-3, "{grid:?} vs {local:?}");
            assert!((grid.1 - local.1).abs() < 1e-3, "{grid:?} vs {local:?}");
        }
    }

    #[test]
    fn higher_dim_bounds_are_consistent() {
        // h1 never exceeds any sampled direction's value, h2 never falls below.
        let mut rng = Rng::new(8);
        let coords = Matrix::from_fn(4, 40, |_, _| rng.normal());
        let (h1, h2) = permeance_local_search(&coords, 32, &mut Rng::new(0)).unwrap();
        assert!(h1 <= h2);
        for _ in 0..2000 {
            let f = objective(&coords, &random_unit(4, &mut rng));
            assert!(h1 <= f + 1e-12 && f <= h2 + 1e-12);
        }
    }

    #[test]
    fn fewer_points_than_dims_gives_zero_infimum() {
        let mut rng = Rng::new(1);
        let coords = Matrix::from_fn(5, 3, |_, _| rng.normal());
        let (h1, _) = permeance_local_search(&coords, 4, &mut rng).unwrap();
        assert!(h1 < 1e-10);
    }

    #[test]
    fn off_span_points_rejected() {
        let basis = sample_grassmannian(5, 2, &mut Rng::new(2)).unwrap();
        let pts = Matrix::from_column_slice(5, 1, &[1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(permeance_estimate(&pts, &basis, 4), Err(Error::NotInSpan(_))));
    }
}
