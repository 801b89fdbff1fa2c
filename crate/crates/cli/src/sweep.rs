//! Accuracy sweeps over fully random ensembles, plain against enhanced.

use ipursuit::datagen::{make_ensemble_fully_random, sample_points};
use ipursuit::pipeline::{ipursuit, EnhancePolicy};
use ipursuit::solver::SolverConfig;
use ipursuit::theory::clustering_accuracy;
use ipursuit::Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_N_PER_CLUSTER: usize = 50;
pub const DEFAULT_TRIALS: usize = 10;
pub const DEFAULT_SHAT_OFFSET: usize = 5;
/// Solver tolerance for sweeps; clustering only needs the affinity support.
pub const DEFAULT_SWEEP_TOL: f64 = 1e-4;

/// Parses `a:b:step` (inclusive) or `a,b,c`.
pub fn parse_list(text: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("cannot parse list `{text}`; use a:b:step or a,b,c");
    let parts: Vec<&str> = text.split(':').collect();
    let out: Vec<usize> = match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step): (usize, usize, usize) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
            );
            if step == 0 || b < a {
                return Err(bad());
            }
            (a..=b).step_by(step).collect()
        }
        [single] => single
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?,
        _ => return Err(bad()),
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MRule {
    /// `m = s + offset`.
    Offset(usize),
    Fixed(usize),
}

impl MRule {
    pub fn parse(text: &str) -> Result<Self, String> {
        let t = text.trim();
        if let Some(rest) = t.strip_prefix("s+") {
            rest.trim()
                .parse()
                .map(MRule::Offset)
                .map_err(|_| format!("bad m rule `{text}`"))
        } else {
            t.parse().map(MRule::Fixed).map_err(|_| format!("bad m rule `{text}`; use s+N or N"))
        }
    }

    pub fn m(&self, s: usize) -> usize {
        match *self {
            MRule::Offset(o) => s + o,
            MRule::Fixed(m) => m,
        }
    }
}

/// Which parameter varies along the grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    S { k: usize, values: Vec<usize> },
    K { s: usize, values: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPlan {
    pub ambient_dim: usize,
    pub axis: Axis,
    pub m_rule: MRule,
    pub n_per_cluster: usize,
    pub trials: usize,
    pub seed: u64,
    /// Enhanced runs remove `s - shat_offset` directions.
    pub shat_offset: usize,
    pub q: usize,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPoint {
    pub ambient_dim: usize,
    pub k: usize,
    pub m: usize,
    pub s: usize,
}

impl SweepPlan {
    fn base(axis: Axis, m_rule: MRule) -> Self {
        Self {
            ambient_dim: 60,
            axis,
            m_rule,
            n_per_cluster: DEFAULT_N_PER_CLUSTER,
            trials: DEFAULT_TRIALS,
            seed: 0,
            shat_offset: DEFAULT_SHAT_OFFSET,
            q: ipursuit::pipeline::DEFAULT_Q,
            solver: SolverConfig::default().with_tolerance(DEFAULT_SWEEP_TOL),
        }
    }

    /// M=60, K=10, m=s+2, s = 10, 11, ..., 40.
    pub fn fig2a() -> Self {
        Self::base(
            Axis::S {
                k: 10,
                values: (10..=40).collect(),
            },
            MRule::Offset(2),
        )
    }

    /// M=60, s=40, m=42, K = 5, ..., 10.
    pub fn fig2b() -> Self {
        Self::base(
            Axis::K {
                s: 40,
                values: (5..=10).collect(),
            },
            MRule::Fixed(42),
        )
    }

    pub fn param_name(&self) -> &'static str {
        match self.axis {
            Axis::S { .. } => "s",
            Axis::K { .. } => "K",
        }
    }

    pub fn grid(&self) -> Vec<GridPoint> {
        let at = |k: usize, s: usize| GridPoint {
            ambient_dim: self.ambient_dim,
            k,
            m: self.m_rule.m(s),
            s,
        };
        match &self.axis {
            Axis::S { k, values } => values.iter().map(|&s| at(*k, s)).collect(),
            Axis::K { s, values } => values.iter().map(|&k| at(k, *s)).collect(),
        }
    }

    pub fn s_hat(&self, s: usize) -> usize {
        s.saturating_sub(self.shat_offset)
    }

    /// Checks every grid point before any trial runs.
    pub fn validate(&self) -> Result<(), String> {
        if self.n_per_cluster == 0 || self.trials == 0 || self.q == 0 {
            return Err("--n-per-cluster, --trials and --q must be at least 1".into());
        }
        self.solver.validate().map_err(|e| e.to_string())?;
        for p in self.grid() {
            if p.k == 0 {
                return Err("K must be at least 1".into());
            }
            if !(p.s < p.m && p.m <= p.ambient_dim) {
                return Err(format!("need s < m <= M, got s={}, m={}, M={}", p.s, p.m, p.ambient_dim));
            }
            let dim = p.k * (p.m - p.s) + p.s;
            if dim > p.ambient_dim {
                return Err(format!(
                    "K(m-s)+s = {dim} exceeds M = {} at s={}, K={}",
                    p.ambient_dim, p.s, p.k
                ));
            }
            let n = p.k * self.n_per_cluster;
            if p.k > n || self.q >= n {
                return Err(format!("q={} needs more than {n} points", self.q));
            }
            // The enhanced data must keep rank above ŝ.
            if self.s_hat(p.s) >= dim.min(n) {
                return Err(format!("s_hat={} is not below the data rank {}", self.s_hat(p.s), dim.min(n)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: &'static str,
    pub value: usize,
    pub method: &'static str,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub trials: usize,
}

/// Accuracies of one trial: plain, enhanced.
fn run_trial(plan: &SweepPlan, p: GridPoint, rng: &Rng) -> ipursuit::Result<(f64, f64)> {
    let mut data_rng = rng.split(0);
    let ens = make_ensemble_fully_random(p.ambient_dim, p.k, p.m, p.s, &mut data_rng)?;
    let d = sample_points(&ens, plan.n_per_cluster, &mut data_rng)?;
    let truth = d.labels().expect("sampled data is labeled");
    let accuracy = |policy: EnhancePolicy, stream: u64| -> ipursuit::Result<f64> {
        let out = ipursuit(&d, p.k, plan.q, &plan.solver, policy, &mut rng.split(stream))?;
        clustering_accuracy(&out.assignment.labels, truth)
    };
    let plain = accuracy(EnhancePolicy::None, 1)?;
    let enhanced = accuracy(EnhancePolicy::Fixed(plan.s_hat(p.s)), 2)?;
    Ok((plain, enhanced))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every (grid point, trial) pair in parallel. Trial `t` of grid point
/// `g` draws from `Rng::new(seed).split(g).split(t)`, so rows do not depend
/// on scheduling. Two rows per grid point: `ipursuit` then `enhanced`.
pub fn run_sweep(plan: &SweepPlan) -> ipursuit::Result<Vec<SweepRow>> {
    let grid = plan.grid();
    let root = Rng::new(plan.seed);
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..plan.trials).map(move |t| (g, t)))
        .collect();
    let results: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(g, t)| run_trial(plan, grid[g], &root.split(g as u64).split(t as u64)))
        .collect::<ipursuit::Result<_>>()?;

    let mut rows = Vec::with_capacity(2 * grid.len());
    for (g, p) in grid.iter().enumerate() {
        let chunk = &results[g * plan.trials..(g + 1) * plan.trials];
        let value = match plan.axis {
            Axis::S { .. } => p.s,
            Axis::K { .. } => p.k,
        };
        for (method, pick) in [("ipursuit", 0), ("enhanced", 1)] {
            let acc: Vec<f64> = chunk.iter().map(|r| if pick == 0 { r.0 } else { r.1 }).collect();
            let (mean_accuracy, std_accuracy) = mean_std(&acc);
            rows.push(SweepRow {
                param: plan.param_name(),
                value,
                method,
                mean_accuracy,
                std_accuracy,
                trials: plan.trials,
            });
        }
    }
    Ok(rows)
}
