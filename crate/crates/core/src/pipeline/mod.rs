//! Affinity construction, spectral clustering, the dominant-direction
//! enhancement, and two reference baselines.

mod affinity;
mod enhance;
pub mod kmeans;
mod spectral;

use serde::{Deserialize, Serialize};

use crate::datagen::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, singular_values};
use crate::rng::Rng;
use crate::solver::{all_directions, DirectionSet, SolverConfig};

pub use affinity::{build_affinity, sparsify_symmetrize, AffinityGraph, AffinityMass};
pub use enhance::{enhance, estimate_shat, DEFAULT_GAP_THRESHOLD, DEFAULT_SHAT_CAP};
pub use spectral::{spectral_cluster, spectral_embedding};

pub const DEFAULT_Q: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
}

/// How many dominant directions to strip before solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnhancePolicy {
    None,
    Fixed(usize),
    /// Pick `ŝ` from the singular-value gap of `D`.
    Auto,
}

impl EnhancePolicy {
    /// Resolves the policy to a concrete `ŝ` for this data.
    pub fn resolve(&self, d: &DataMatrix) -> Result<usize> {
        match *self {
            EnhancePolicy::None => Ok(0),
            EnhancePolicy::Fixed(s) => Ok(s),
            EnhancePolicy::Auto => recommend_shat(&singular_values(d.points())?),
        }
    }
}

/// [`estimate_shat`] with the default cap and threshold, restricted to the
/// numerically nonzero singular values: a gap into the null space is not a
/// dominant direction, and removing it would leave nothing to cluster.
pub fn recommend_shat(singular_values: &[f64]) -> Result<usize> {
    let nonzero = &singular_values[..numerical_rank(singular_values)];
    if nonzero.len() < 2 {
        return Ok(0);
    }
    estimate_shat(nonzero, DEFAULT_SHAT_CAP, DEFAULT_GAP_THRESHOLD)
}

#[derive(Debug, Clone)]
pub struct IPursuitOutput {
    pub assignment: ClusterAssignment,
    pub affinity: AffinityGraph,
    pub directions: DirectionSet,
    pub s_hat: usize,
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(Error::InvalidK { k, n })
    } else {
        Ok(())
    }
}

/// Optional enhancement, directions of innovation, sparsified affinity,
/// spectral clustering.
pub fn ipursuit(
    d: &DataMatrix,
    k: usize,
    q: usize,
    cfg: &SolverConfig,
    policy: EnhancePolicy,
    rng: &mut Rng,
) -> Result<IPursuitOutput> {
    check_k(k, d.len())?;
    cfg.validate()?;
    let s_hat = policy.resolve(d)?;
    let data = enhance(d, s_hat)?;
    let directions = all_directions(&data, cfg)?;
    let affinity = build_affinity(&directions, &data, q)?;
    let assignment = spectral_cluster(&affinity, k, rng)?;
    Ok(IPursuitOutput {
        assignment,
        affinity,
        directions,
        s_hat,
    })
}

/// Thresholded inner-product baseline: affinity `|DᵀD|` through the same
/// sparsification and spectral stage as [`ipursuit`].
pub fn tsc_baseline(d: &DataMatrix, k: usize, q: usize, rng: &mut Rng) -> Result<ClusterAssignment> {
    check_k(k, d.len())?;
    let w = sparsify_symmetrize(d.points().tr_mul(d.points()), q)?;
    spectral_cluster(&w, k, rng)
}

/// k-means++ on the raw columns, 10 restarts.
pub fn kmeans_baseline(d: &DataMatrix, k: usize, rng: &mut Rng) -> Result<ClusterAssignment> {
    check_k(k, d.len())?;
    let pts: Vec<Vec<f64>> = d.points().column_iter().map(|c| c.iter().copied().collect()).collect();
    let r = kmeans::kmeans(&pts, k, &kmeans::KMeansParams::default(), rng);
    Ok(ClusterAssignment { labels: r.labels, k })
}
