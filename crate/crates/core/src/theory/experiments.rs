//! Monte-Carlo checks of the principal-angle approximation and of the
//! leading singular vector's alignment with the intersection.
//!
//! Trials draw from `rng.split(trial)` and run in parallel; results are
//! gathered by trial index so output does not depend on scheduling.

use nalgebra::SymmetricEigen;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{limiting_t, theorem4_bound, Theorem4Bound};
use crate::datagen::{sample_points, SubspaceEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{aff_inf, concat_bases, sample_grassmannian, singular_values, OrthonormalBasis};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    fn of(values: &[f64]) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Spread { mean, min, max }
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub s: usize,
    pub m: usize,
    pub t_limit: f64,
    /// `cos²θ₁ / T`.
    pub squared: Spread,
    /// `cos θ₁ / √T`.
    pub sqrt: Spread,
}

fn domain(msg: String) -> Error {
    Error::DomainError(msg)
}

/// For each `s`, samples `trials` independent pairs of uniformly random
/// subspaces of dimensions `m−s` and `(K−1)(m−s)+s` in `R^M` (`m` is
/// `m_ratio·s`) and compares the squared largest principal cosine against
/// [`limiting_t`].
///
/// The pair's principal angles are invariant under a common rotation, so the
/// larger subspace is fixed to the leading coordinate block and only the
/// smaller one is drawn; the cosines are then the singular values of the
/// smaller basis restricted to those coordinates.
pub fn ratio_experiment(
    big_m: usize,
    k: usize,
    s_list: &[usize],
    m_ratio: f64,
    trials: usize,
    rng: &Rng,
) -> Result<Vec<RatioRow>> {
    if trials == 0 || k < 2 || s_list.is_empty() {
        return Err(domain(format!("need trials ≥ 1, K ≥ 2 and a nonempty s list (K={k}, trials={trials})")));
    }
    let mut dims = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let exact = m_ratio * s as f64;
        let m = exact.round() as usize;
        if (exact - m as f64).abs() > 1e-9 || m <= s {
            return Err(domain(format!("m = {m_ratio}·{s} must be an integer above s")));
        }
        let (inn, other) = (m - s, (k - 1) * (m - s) + s);
        if inn + other > big_m {
            return Err(domain(format!("dims {inn} + {other} exceed M = {big_m}")));
        }
        dims.push((s, m, inn, other));
    }
    dims.iter()
        .enumerate()
        .map(|(idx, &(s, m, inn, other))| {
            let t = limiting_t(big_m, m, k, s)?;
            let base = rng.split(idx as u64);
            let cos: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let mut r = base.split(trial as u64);
                    let a = sample_grassmannian(big_m, inn, &mut r)?;
                    let top = a.matrix().rows(0, other).into_owned();
                    Ok(singular_values(&top)?[0].min(1.0))
                })
                .collect::<Result<_>>()?;
            let sq: Vec<f64> = cos.iter().map(|c| c * c / t).collect();
            let rt: Vec<f64> = cos.iter().map(|c| c / t.sqrt()).collect();
            Ok(RatioRow {
                s,
                m,
                t_limit: t,
                squared: Spread::of(&sq),
                sqrt: Spread::of(&rt),
            })
        })
        .collect()
}

/// `‖Uᵀx₁‖ / ‖U⊥ᵀx₁‖` per trial, where `x₁` is the leading left singular
/// vector of `n` semi-random points per cluster. `U⊥` is taken inside the
/// span of the data, which loses nothing since `x₁` lies there.
pub fn theorem4_ratios(ens: &SubspaceEnsemble, n: usize, trials: usize, rng: &Rng) -> Result<Vec<f64>> {
    if ens.intersection_dim() == 0 {
        return Err(domain("the intersection is empty, so λ1 is identically zero".into()));
    }
    if n == 0 || trials == 0 {
        return Err(domain(format!("need n ≥ 1 and trials ≥ 1, got n={n}, trials={trials}")));
    }
    let mut blocks: Vec<&OrthonormalBasis> = vec![ens.intersection()];
    blocks.extend(ens.innovations());
    let span = concat_bases(ens.ambient_dim(), &blocks)?;
    let u = ens.intersection();
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut r = rng.split(trial as u64);
            let d = sample_points(ens, n, &mut r)?;
            // Leading eigenvector of DDᵀ, computed in span coordinates.
            let y = span.matrix().tr_mul(d.points());
            let eig = SymmetricEigen::try_new(&y * y.transpose(), f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
            let top = eig.eigenvectors.column(eig.eigenvalues.imax()).into_owned();
            let x1 = span.matrix() * top;
            let lambda1 = u.projection_norm(&x1);
            let lambda2 = u.residual(&x1).norm();
            Ok(lambda1 / lambda2)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem4Empirical {
    pub bound: Theorem4Bound,
    pub t2: f64,
    pub frequency: f64,
    pub mean_ratio: f64,
    pub ratios: Vec<f64>,
}

/// Fraction of trials whose `λ1/λ2` meets the analytic lower bound.
pub fn theorem4_empirical(
    ens: &SubspaceEnsemble,
    n: usize,
    kappa: f64,
    trials: usize,
    rng: &Rng,
) -> Result<Theorem4Empirical> {
    let k = ens.num_clusters();
    let mut t2: f64 = 0.0;
    for i in 0..k {
        for j in (i + 1)..k {
            t2 = t2.max(aff_inf(ens.innovation(i), ens.innovation(j))?);
        }
    }
    let bound = theorem4_bound(ens.cluster_dim(0), ens.intersection_dim(), k, n, t2, kappa)?;
    let ratios = theorem4_ratios(ens, n, trials, rng)?;
    let hits = ratios.iter().filter(|&&r| r >= bound.ratio_bound).count();
    Ok(Theorem4Empirical {
        bound,
        t2,
        frequency: hits as f64 / trials as f64,
        mean_ratio: ratios.iter().sum::<f64>() / trials as f64,
        ratios,
    })
}
