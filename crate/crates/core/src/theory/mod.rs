//! Clustering accuracy and the geometric quantities behind the recovery
//! guarantees: coherence of innovations, permeance, closed-form bounds and
//! Monte-Carlo checks.

mod accuracy;
mod bounds;
mod coherence;
mod experiments;
mod permeance;

use serde::{Deserialize, Serialize};

use crate::datagen::{DataMatrix, SubspaceEnsemble};
use crate::error::{Error, Result};

pub use accuracy::clustering_accuracy;
pub use bounds::{
    check_theorem1, johnstone_mu_sigma, limiting_t, semi_random_h_bounds, theorem2_probability, theorem4_bound,
    zeta, ProbabilityBound, Theorem4Bound,
};
pub use coherence::{compute_t_values, innovation_assumption_holds, TValues};
pub use experiments::{
    ratio_experiment, theorem4_empirical, theorem4_ratios, RatioRow, Spread, Theorem4Empirical,
};
pub use permeance::{
    ensemble_permeance, permeance_estimate, permeance_grid, permeance_local_search, DEFAULT_RESTARTS,
    GRID_POINTS,
};

/// Every evaluated quantity for one ensemble and data draw. Quantities whose
/// formula is undefined for the inputs (for example `ζ` with no
/// intersection) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub h1_est: f64,
    pub h2_est: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub innovation_assumption: bool,
    pub theorem1_ok: bool,
    pub h1_semi_random: Option<f64>,
    pub h2_semi_random: Option<f64>,
    pub zeta: Option<f64>,
    pub theorem2_prob: Option<f64>,
    pub theorem2_epsilon: Option<f64>,
    pub theorem2_vacuous: bool,
    #[serde(rename = "T_limit")]
    pub t_limit: f64,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub theorem4_bound: Option<f64>,
    pub theorem4_prob: Option<f64>,
    pub theorem4_vacuous: bool,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Builds a report for `d` drawn from `ens`. `kappa` feeds the
/// leading-singular-vector bound; it is skipped when `None` or out of range.
pub fn theory_report(ens: &SubspaceEnsemble, d: &DataMatrix, kappa: Option<f64>) -> Result<TheoryReport> {
    let labels = d.labels().ok_or(Error::MissingLabels)?;
    let k = ens.num_clusters();
    let n = (0..k)
        .map(|c| labels.iter().filter(|&&l| l == c).count())
        .min()
        .unwrap_or(0);
    let (big_m, m, s) = (ens.ambient_dim(), ens.cluster_dim(0), ens.intersection_dim());

    let (h1_est, h2_est) = ensemble_permeance(ens, d, DEFAULT_RESTARTS)?;
    let t = compute_t_values(ens, d)?;
    let innovation_assumption = innovation_assumption_holds(ens);
    let theorem1_ok =
        innovation_assumption && check_theorem1(h1_est, h2_est, t.t1, t.t2, t.t3, k).unwrap_or(false);
    let semi = semi_random_h_bounds(n, m).ok();
    let z = zeta(m, s, k, t.t2, t.t3).ok();
    let t2b = theorem2_probability(n, d.len(), m, s, k, t.t2, t.t3).ok();
    let mu_sigma = johnstone_mu_sigma(big_m, m, k, s).ok();
    let t4 = kappa.and_then(|kap| theorem4_bound(m, s, k, n, t.t2, kap).ok());

    Ok(TheoryReport {
        h1_est,
        h2_est,
        t1: t.t1,
        t2: t.t2,
        t3: t.t3,
        innovation_assumption,
        theorem1_ok,
        h1_semi_random: semi.map(|x| x.0),
        h2_semi_random: semi.map(|x| x.1),
        zeta: z.and_then(finite),
        theorem2_prob: t2b.and_then(|b| finite(b.prob)),
        theorem2_epsilon: t2b.and_then(|b| finite(b.epsilon)),
        theorem2_vacuous: t2b.is_none_or(|b| b.vacuous),
        t_limit: limiting_t(big_m, m, k, s)?,
        mu: mu_sigma.map(|x| x.0),
        sigma: mu_sigma.map(|x| x.1),
        theorem4_bound: t4.and_then(|b| finite(b.ratio_bound)),
        theorem4_prob: t4.and_then(|b| finite(b.prob)),
        theorem4_vacuous: t4.is_none_or(|b| b.vacuous()),
    })
}
