//! Directions of innovation: for each point `d_i`, the vector `c` minimizing
//! `‖cᵀD‖₁` subject to `cᵀd_i = 1`.

mod admm;
mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub use admm::{DirectionSolution, InnovationProblem};
pub use simplex::{lp_oracle, minimize_standard_form, LpSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Augmented-Lagrangian penalty.
    pub rho: f64,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub max_iters: usize,
    /// Parameterize `c` inside `span(D)` before solving.
    pub reduce_to_span: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            primal_tol: 1e-7,
            dual_tol: 1e-7,
            max_iters: 20_000,
            reduce_to_span: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.rho) {
            return Err(Error::InvalidConfig(format!("rho must be positive, got {}", self.rho)));
        }
        if !positive(self.primal_tol) || !positive(self.dual_tol) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    /// Same configuration with both tolerances set to `tol`.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.primal_tol = tol;
        self.dual_tol = tol;
        self
    }
}

/// One direction per data point, column `i` for point `i`.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    pub directions: Matrix,
    pub objective_values: Vec<f64>,
    pub converged: Vec<bool>,
    pub iterations: Vec<usize>,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.directions.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.ncols() == 0
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Solves for the direction of innovation of point `i`.
pub fn innovation_direction(d: &DataMatrix, i: usize, cfg: &SolverConfig) -> Result<DirectionSolution> {
    InnovationProblem::new(d, cfg)?.solve(i)
}

/// All `N` directions. The joint problem separates per column, so each
/// column is solved independently against one shared factorization; the
/// result does not depend on the number of worker threads.
pub fn all_directions(d: &DataMatrix, cfg: &SolverConfig) -> Result<DirectionSet> {
    let problem = InnovationProblem::new(d, cfg)?;
    let sols: Vec<DirectionSolution> = (0..d.len())
        .into_par_iter()
        .map(|i| problem.solve(i))
        .collect::<Result<_>>()?;
    let mut directions = Matrix::zeros(d.ambient_dim(), d.len());
    let mut objective_values = Vec::with_capacity(d.len());
    let mut converged = Vec::with_capacity(d.len());
    let mut iterations = Vec::with_capacity(d.len());
    for (i, s) in sols.into_iter().enumerate() {
        directions.set_column(i, &s.direction);
        objective_values.push(s.objective);
        converged.push(s.converged);
        iterations.push(s.iterations);
    }
    Ok(DirectionSet {
        directions,
        objective_values,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{canonical_ensemble, make_ensemble_fully_random, sample_points};
    use crate::rng::Rng;

    fn data(cols: &[&[f64]]) -> DataMatrix {
        let m = cols[0].len();
        DataMatrix::from_unnormalized(Matrix::from_fn(m, cols.len(), |i, j| cols[j][i]), None).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig { rho: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig { max_iters: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolverConfig::default().with_tolerance(-1.0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn orthogonal_pair() {
        let d = data(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let s = innovation_direction(&d, 0, &SolverConfig::default()).unwrap();
        assert!(s.converged);
        assert!((s.direction[0] - 1.0).abs() < 1e-6 && s.direction[1].abs() < 1e-6);
        assert!((s.objective - 1.0).abs() < 1e-6);
        let row = d.points().tr_mul(&s.direction);
        assert!((row[0].abs() - 1.0).abs() < 1e-6 && row[1].abs() < 1e-6);
    }

    #[test]
    fn repeated_point_and_orthogonal_cluster() {
        let d = data(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let s = innovation_direction(&d, 2, &SolverConfig::default()).unwrap();
        let row = d.points().tr_mul(&s.direction).abs();
        assert!(row[0] < 1e-6 && row[1] < 1e-6 && (row[2] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn index_out_of_range() {
        let d = data(&[&[1.0, 0.0]]);
        assert_eq!(
            innovation_direction(&d, 3, &SolverConfig::default()).unwrap_err(),
            Error::IndexOutOfRange { index: 3, len: 1 }
        );
    }

    #[test]
    fn identity_data_gives_identity_directions() {
        let d = DataMatrix::new(Matrix::identity(3, 3), None).unwrap();
        let set = all_directions(&d, &SolverConfig::default()).unwrap();
        assert!(set.all_converged());
        assert!((set.directions.clone() - Matrix::identity(3, 3)).amax() < 1e-6);
        assert!(set.objective_values.iter().all(|o| (o - 1.0).abs() < 1e-6));
    }

    #[test]
    fn orthogonal_clusters_have_no_cross_affinity() {
        let ens = canonical_ensemble(7, 2, 3, 0).unwrap();
        let d = sample_points(&ens, 8, &mut Rng::new(3)).unwrap();
        let set = all_directions(&d, &SolverConfig::default()).unwrap();
        let w = set.directions.tr_mul(d.points()).abs();
        let labels = d.labels().unwrap();
        for i in 0..d.len() {
            for j in 0..d.len() {
                if labels[i] != labels[j] {
                    assert!(w[(i, j)] < 1e-6, "w[{i},{j}] = {}", w[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn batch_matches_standalone_bitwise() {
        let mut rng = Rng::new(21);
        let ens = make_ensemble_fully_random(6, 2, 2, 1, &mut rng).unwrap();
        let d = sample_points(&ens, 5, &mut rng).unwrap();
        let cfg = SolverConfig::default();
        let set = all_directions(&d, &cfg).unwrap();
        for i in 0..d.len() {
            let s = innovation_direction(&d, i, &cfg).unwrap();
            for r in 0..d.ambient_dim() {
                assert_eq!(s.direction[r].to_bits(), set.directions[(r, i)].to_bits());
            }
            assert_eq!(s.objective.to_bits(), set.objective_values[i].to_bits());
        }
    }

    #[test]
    fn feasibility_and_span() {
        let mut rng = Rng::new(8);
        let ens = make_ensemble_fully_random(9, 3, 2, 1, &mut rng).unwrap();
        let d = sample_points(&ens, 4, &mut rng).unwrap();
        let set = all_directions(&d, &SolverConfig::default()).unwrap();
        let span = crate::linalg::orthonormal_basis(d.points()).unwrap();
        for i in 0..d.len() {
            let c = set.directions.column(i).into_owned();
            assert!((c.dot(&d.points().column(i)) - 1.0).abs() <= 1e-6);
            assert!(span.residual(&c).norm() <= 1e-8 * c.norm().max(1.0));
        }
    }

    #[test]
    fn ambient_path_agrees_with_reduced_path() {
        let mut rng = Rng::new(31);
        let ens = make_ensemble_fully_random(4, 2, 2, 0, &mut rng).unwrap();
        let d = sample_points(&ens, 4, &mut rng).unwrap();
        let reduced = SolverConfig::default();
        let ambient = SolverConfig { reduce_to_span: false, ..reduced };
        for i in 0..d.len() {
            let a = innovation_direction(&d, i, &reduced).unwrap();
            let b = innovation_direction(&d, i, &ambient).unwrap();
            assert!((a.objective - b.objective).abs() < 1e-5 * a.objective);
        }
        // Rank-deficient data cannot use the ambient Gram factorization.
        let low = sample_points(&make_ensemble_fully_random(6, 1, 2, 0, &mut rng).unwrap(), 4, &mut rng).unwrap();
        assert_eq!(innovation_direction(&low, 0, &ambient).unwrap_err(), Error::SingularGram);
    }
}
