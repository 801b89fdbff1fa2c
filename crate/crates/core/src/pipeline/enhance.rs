use crate::datagen::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{thin_svd, Matrix};

const DEGENERATE_NORM: f64 = 1e-8;

/// Removes each point's component along the `s_hat` dominant left singular
/// vectors of `D` and renormalizes: `d_i ← X Xᵀ d_i / ‖X Xᵀ d_i‖` with `X`
/// the left singular vectors `s_hat..rank`.
pub fn enhance(d: &DataMatrix, s_hat: usize) -> Result<DataMatrix> {
    if s_hat == 0 {
        return Ok(d.clone());
    }
    let svd = thin_svd(d.points())?;
    let rank = svd.rank();
    if s_hat >= rank {
        return Err(Error::RankTooLow { s_hat, rank });
    }
    let kept = svd.u.columns(s_hat, rank - s_hat);
    let mut proj: Matrix = kept * kept.tr_mul(d.points());
    for (i, mut col) in proj.column_iter_mut().enumerate() {
        let n = col.norm();
        if n < DEGENERATE_NORM {
            return Err(Error::DegeneratePoint { index: i });
        }
        col /= n;
    }
    DataMatrix::new(proj, d.labels().map(|l| l.to_vec()))
}

/// Largest ratio `σ_i / σ_{i+1}` over `1 ≤ i ≤ min(cap, len − 1)` (1-based);
/// returns that `i` when the ratio reaches `gap_threshold`, otherwise 0.
pub fn estimate_shat(singular_values: &[f64], cap: usize, gap_threshold: f64) -> Result<usize> {
    if singular_values.len() < 2 {
        return Err(Error::TooFewValues);
    }
    let last = cap.min(singular_values.len() - 1);
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 1..=last {
        let (a, b) = (singular_values[i - 1], singular_values[i]);
        let ratio = if b > 0.0 {
            a / b
        } else if a > 0.0 {
            f64::INFINITY
        } else {
            1.0
        };
        if ratio > best.1 {
            best = (i, ratio);
        }
    }
    Ok(if best.1 >= gap_threshold { best.0 } else { 0 })
}

pub const DEFAULT_SHAT_CAP: usize = 20;
pub const DEFAULT_GAP_THRESHOLD: f64 = 2.0;
