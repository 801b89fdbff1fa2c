//! Closed-form sufficient conditions and probability bounds. Bounds are
//! returned unclamped; a value at or below zero means the guarantee is
//! vacuous for those parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn domain(msg: impl Into<String>) -> Error {
    Error::DomainError(msg.into())
}

/// Permeance bounds under uniformly distributed coefficients, `n` points in
/// an `m`-dimensional subspace.
pub fn semi_random_h_bounds(n: usize, m: usize) -> Result<(f64, f64)> {
    if n < 2 || m < 2 {
        return Err(Error::InvalidDims(format!("need n >= 2 and m >= 2, got n={n}, m={m}")));
    }
    let (nf, mf) = (n as f64, m as f64);
    let tail = 2.0 * nf.sqrt() + (2.0 * nf * nf.ln() / (mf - 1.0)).sqrt();
    let lead = nf / mf.sqrt();
    Ok(((2.0 / PI).sqrt() * lead - tail, lead + tail))
}

/// Deterministic sufficient condition for an error-less affinity matrix.
pub fn check_theorem1(h1: f64, h2: f64, t1: f64, t2: f64, t3: f64, k: usize) -> Result<bool> {
    if !(0.0..1.0).contains(&t3) {
        return Err(domain(format!("t3 must lie in [0, 1), got {t3}")));
    }
    if k == 0 {
        return Err(domain("K must be positive"));
    }
    let kf = k as f64;
    let spread = 1.0 - (kf - 2.0) * t2;
    if spread <= 0.0 {
        return Err(domain(format!("(K-2)·t2 = {} must be below 1", (kf - 2.0) * t2)));
    }
    let lift = (t3 * t3 / (1.0 - t3 * t3)).sqrt();
    Ok(h1 * spread.sqrt() >= h2 * (lift + t1) && h1 * (kf - 1.0).sqrt() >= h2 * (lift + 1.0))
}

/// `ζ = (m−s)[t3² − (K−1)t2²] / (s(1 − t3²))`.
pub fn zeta(m: usize, s: usize, k: usize, t2: f64, t3: f64) -> Result<f64> {
    if s == 0 || s >= m {
        return Err(domain(format!("need 0 < s < m, got s={s}, m={m}")));
    }
    if t3.is_nan() || t3 >= 1.0 {
        return Err(domain(format!("t3 must be below 1, got {t3}")));
    }
    let (mf, sf, kf) = (m as f64, s as f64, k as f64);
    Ok((mf - sf) * (t3 * t3 - (kf - 1.0) * t2 * t2) / (sf * (1.0 - t3 * t3)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityBound {
    pub prob: f64,
    pub epsilon: f64,
    pub vacuous: bool,
}

/// Success probability `1 − 2/n − 2N e^{−ε²}` for the semi-random model.
/// Marked vacuous when `ζ ≤ 1` or the bound is not positive.
pub fn theorem2_probability(
    n: usize,
    big_n: usize,
    m: usize,
    s: usize,
    k: usize,
    t2: f64,
    t3: f64,
) -> Result<ProbabilityBound> {
    if n < 1 || big_n < 1 {
        return Err(domain("n and N must be positive"));
    }
    let z = zeta(m, s, k, t2, t3)?;
    let (mf, sf) = (m as f64, s as f64);
    let a = sf.sqrt() + z * sf / (mf - sf).sqrt();
    let disc = a * a + 2.0 * sf * (z - 1.0);
    if disc < 0.0 {
        return Err(domain(format!("ζ = {z} leaves the deviation term undefined")));
    }
    let epsilon = 0.5 * (-a + disc.sqrt());
    let prob = 1.0 - 2.0 / n as f64 - 2.0 * big_n as f64 * (-epsilon * epsilon).exp();
    Ok(ProbabilityBound {
        prob,
        epsilon,
        vacuous: z <= 1.0 || prob <= 0.0,
    })
}

/// Limiting value of `cos²` of the smallest principal angle between an
/// `(m−s)`-dimensional and a `((K−1)(m−s)+s)`-dimensional uniformly random
/// subspace of `R^M`.
pub fn limiting_t(big_m: usize, m: usize, k: usize, s: usize) -> Result<f64> {
    if big_m == 0 || k == 0 || s > m {
        return Err(domain(format!("invalid (M, m, K, s) = ({big_m}, {m}, {k}, {s})")));
    }
    let (mf, sf, kf) = (m as f64, s as f64, k as f64);
    let inn = mf - sf;
    let radical = (inn * ((kf - 2.0) * inn + mf)).max(0.0).sqrt();
    Ok(((kf - 1.0) * inn + mf + 2.0 * radical) / big_m as f64)
}

/// Centering and scale of the largest root in the small-angle
/// approximation, with `φ/2 = √((m−s)/M)` and `γ/2 = √(((K−1)(m−s)+s)/M)`.
pub fn johnstone_mu_sigma(big_m: usize, m: usize, k: usize, s: usize) -> Result<(f64, f64)> {
    if s >= m {
        return Err(domain(format!("need s < m, got s={s}, m={m}")));
    }
    if big_m < 2 || k == 0 {
        return Err(domain(format!("invalid M={big_m}, K={k}")));
    }
    let (bm, mf, sf, kf) = (big_m as f64, m as f64, s as f64, k as f64);
    let phi = 2.0 * ((mf - sf) / bm).sqrt();
    let gamma = 2.0 * (((kf - 1.0) * (mf - sf) + sf) / bm).sqrt();
    let (sp, sg) = (phi.sin(), gamma.sin());
    if sp <= 0.0 || sg <= 0.0 {
        return Err(domain(format!("sin φ = {sp}, sin γ = {sg} must be positive")));
    }
    let mu = ((phi + gamma) / 2.0).sin().powi(2);
    let sigma3 = (phi + gamma).sin().powi(4) / (4.0 * (bm - 1.0).powi(2) * sp * sg);
    Ok((mu, sigma3.cbrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem4Bound {
    pub ratio_bound: f64,
    pub kappa_prime: f64,
    pub epsilon: f64,
    pub prob: f64,
}

impl Theorem4Bound {
    pub fn vacuous(&self) -> bool {
        self.ratio_bound <= 0.0 || self.prob <= 0.0
    }
}

/// Lower bound on `‖Uᵀx₁‖ / ‖U⊥ᵀx₁‖` for the leading left singular vector
/// `x₁`, with its success probability. Requires `(m−s)/m ≤ κ < 1`.
pub fn theorem4_bound(m: usize, s: usize, k: usize, n: usize, t2: f64, kappa: f64) -> Result<Theorem4Bound> {
    if n < 2 || m < 2 || k == 0 || s >= m {
        return Err(domain(format!("invalid (m, s, K, n) = ({m}, {s}, {k}, {n})")));
    }
    let (mf, sf, kf, nf) = (m as f64, s as f64, k as f64, n as f64);
    let lower = (mf - sf) / mf;
    if !(kappa >= lower && kappa < 1.0) {
        return Err(domain(format!("κ = {kappa} outside [{lower}, 1)")));
    }
    let inn = mf - sf;
    let core = (2.0 * kf * nf / (PI * mf)).sqrt() - 2.0 - (2.0 * nf.ln() / (mf - 1.0)).sqrt();
    let kappa_prime = mf * core * core / ((1.0 + (kf - 1.0) * t2) * nf * inn * kappa);
    let ratio_bound = (kappa_prime - 1.0) / (2.0 * kappa_prime.sqrt());
    let a = inn.sqrt() + kappa * sf.sqrt() / (1.0 - kappa);
    let b = kappa * sf / ((1.0 - kappa) * inn) - 1.0;
    let epsilon = inn * b / (a + (a * a + 2.0 * inn * b).sqrt());
    let prob = 1.0 - 1.0 / nf - 2.0 * kf * nf * (-epsilon * epsilon).exp();
    Ok(Theorem4Bound {
        ratio_bound,
        kappa_prime,
        epsilon,
        prob,
    })
}
