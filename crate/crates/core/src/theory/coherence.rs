use serde::{Deserialize, Serialize};

use crate::datagen::{DataMatrix, SubspaceEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{aff_inf, principal_angle_cosines};

const CONTAINMENT_TOL: f64 = 1e-8;

/// Coherence between innovation blocks (`t1`, `t2`) and between points and
/// the other clusters (`t3`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TValues {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

/// True when no innovation block lies inside the span of the others, i.e.
/// `Û_k` has at least one principal angle to `Û_{-k}` bounded away from 0.
pub fn innovation_assumption_holds(ens: &SubspaceEnsemble) -> bool {
    (0..ens.num_clusters()).all(|k| {
        let own = ens.innovation(k);
        if own.dim() == 0 {
            return false;
        }
        let Ok(others) = ens.other_innovations(k) else {
            return false;
        };
        let Ok(cos) = principal_angle_cosines(own, &others) else {
            return false;
        };
        // Fewer cosines than dim Û_k means some direction is orthogonal to Û_{-k}.
        cos.len() < own.dim() || cos.iter().any(|&c| c < 1.0 - CONTAINMENT_TOL)
    })
}

pub fn compute_t_values(ens: &SubspaceEnsemble, d: &DataMatrix) -> Result<TValues> {
    let labels = d.labels().ok_or(Error::MissingLabels)?;
    let k_count = ens.num_clusters();
    if let Some(&bad) = labels.iter().find(|&&l| l >= k_count) {
        return Err(Error::IndexOutOfRange { index: bad, len: k_count });
    }
    if d.ambient_dim() != ens.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "data in R^{}, ensemble in R^{}",
            d.ambient_dim(),
            ens.ambient_dim()
        )));
    }
    let mut t1: f64 = 0.0;
    let mut t2: f64 = 0.0;
    let mut others = Vec::with_capacity(k_count);
    for k in 0..k_count {
        t1 = t1.max(aff_inf(ens.innovation(k), &ens.other_innovations(k)?)?);
        for j in (k + 1)..k_count {
            t2 = t2.max(aff_inf(ens.innovation(k), ens.innovation(j))?);
        }
        others.push(ens.other_clusters(k)?);
    }
    let mut t3: f64 = 0.0;
    for (i, &k) in labels.iter().enumerate() {
        t3 = t3.max(others[k].projection_norm(&d.column(i)));
    }
    Ok(TValues {
        t1: t1.min(1.0),
        t2: t2.min(1.0),
        t3: t3.min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{
        canonical_ensemble, make_ensemble_deterministic, make_ensemble_fully_random, sample_points,
        sample_points_deterministic,
    };
    use crate::linalg::Matrix;
    use crate::rng::Rng;

    fn col(m: usize, entries: &[(usize, f64)]) -> Matrix {
        let mut c = Matrix::zeros(m, 1);
        for &(i, v) in entries {
            c[(i, 0)] = v;
        }
        c
    }

    #[test]
    fn orthogonal_ensemble_is_incoherent() {
        let ens = canonical_ensemble(12, 3, 3, 0).unwrap();
        let d = sample_points(&ens, 5, &mut Rng::new(0)).unwrap();
        let t = compute_t_values(&ens, &d).unwrap();
        assert!(t.t1 < 1e-14 && t.t2 < 1e-14);
        assert!(t.t3 < 1e-14);
        assert!(innovation_assumption_holds(&ens));
    }

    #[test]
    fn forty_five_degree_pair() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = Matrix::zeros(3, 0);
        let inn = [col(3, &[(0, 1.0)]), col(3, &[(0, h), (1, h)])];
        let ens = make_ensemble_deterministic(&u, &inn).unwrap();
        let one = Matrix::from_element(1, 1, 1.0);
        let d = sample_points_deterministic(&ens, &[one.clone(), one]).unwrap();
        let t = compute_t_values(&ens, &d).unwrap();
        for v in [t.t1, t.t2, t.t3] {
            assert!((v - h).abs() < 1e-12);
        }
    }

    #[test]
    fn contained_innovation_breaks_assumption() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = Matrix::zeros(4, 0);
        let inn = [col(4, &[(0, h), (1, h)]), col(4, &[(0, 1.0)]), col(4, &[(1, 1.0)])];
        let ens = make_ensemble_deterministic(&u, &inn).unwrap();
        assert!(!innovation_assumption_holds(&ens));
    }

    #[test]
    fn random_ensembles_generic_and_ordered() {
        for seed in 0..10 {
            let mut rng = Rng::new(seed);
            let ens = make_ensemble_fully_random(30, 4, 5, 2, &mut rng).unwrap();
            assert!(innovation_assumption_holds(&ens));
            let d = sample_points(&ens, 6, &mut rng).unwrap();
            let t = compute_t_values(&ens, &d).unwrap();
            assert!(t.t2 <= t.t1 + 1e-10);
            assert!(t.t1 <= 1.0 && t.t3 <= 1.0);
        }
    }

    #[test]
    fn labels_required() {
        let ens = canonical_ensemble(6, 2, 2, 0).unwrap();
        let d = sample_points(&ens, 2, &mut Rng::new(0)).unwrap().with_labels(None).unwrap();
        assert_eq!(compute_t_values(&ens, &d).unwrap_err(), Error::MissingLabels);
    }
}
