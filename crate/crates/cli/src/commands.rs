use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ipursuit::datagen::{
    canonical_ensemble, make_ensemble_deterministic, make_ensemble_fully_random, sample_points, DataMatrix,
    EnsembleShape, SubspaceEnsemble,
};
use ipursuit::linalg::{numerical_rank, singular_values as svals, Matrix};
use ipursuit::pipeline::{
    ipursuit, kmeans_baseline, recommend_shat, tsc_baseline, EnhancePolicy, DEFAULT_GAP_THRESHOLD, DEFAULT_SHAT_CAP,
};
use ipursuit::solver::SolverConfig;
use ipursuit::theory::{clustering_accuracy, ratio_experiment as run_ratio, theory_report, TheoryReport};
use ipursuit::Rng;
use serde::{Deserialize, Serialize};

use crate::args::{ClusterArgs, EnsembleKind, Method, RatioArgs, SingularArgs, SweepArgs, TheoryArgs};
use crate::data::{labels_to_string, load_csv, to_csv_string};
use crate::record::ResultRecord;
use crate::sweep::{parse_list, run_sweep, Axis, MRule, SweepPlan};
use crate::{usage, write_file, CliError};

/// Metadata for a CSV output lives next to it as `<out>.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut p: OsString = out.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

pub fn parse_enhance(text: &str) -> Result<EnhancePolicy, CliError> {
    match text.trim() {
        "auto" => Ok(EnhancePolicy::Auto),
        "none" | "0" => Ok(EnhancePolicy::None),
        t => t
            .parse()
            .map(EnhancePolicy::Fixed)
            .map_err(|_| usage(format!("--enhance expects auto, none or an integer, got `{text}`"))),
    }
}

fn solver_with(tol: f64) -> Result<SolverConfig, CliError> {
    let cfg = SolverConfig::default().with_tolerance(tol);
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn cluster_sizes(labels: &[usize], k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    for &l in labels {
        sizes[l] += 1;
    }
    sizes
}

#[derive(Serialize)]
struct ClusterConfig {
    input: String,
    k: usize,
    q: usize,
    enhance: EnhancePolicy,
    method: Method,
    seed: u64,
    solver: SolverConfig,
}

#[derive(Serialize)]
struct ClusterMetrics {
    accuracy: Option<f64>,
    n_points: usize,
    ambient_dim: usize,
    s_hat: Option<usize>,
    directions_converged: Option<usize>,
    cluster_sizes: Vec<usize>,
}

pub fn cluster(a: ClusterArgs) -> Result<(), CliError> {
    if a.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    if a.q == 0 {
        return Err(usage("--q must be at least 1"));
    }
    let policy = parse_enhance(&a.enhance)?;
    let solver = solver_with(a.tol)?;
    let d = load_csv(&a.input)?;
    if a.k > d.len() {
        return Err(usage(format!("--k {} exceeds the {} points in {}", a.k, d.len(), display(&a.input))));
    }
    if let EnhancePolicy::Fixed(s) = policy {
        if s >= d.ambient_dim().min(d.len()) {
            return Err(usage(format!("--enhance {s} leaves no dimensions to cluster in")));
        }
    }

    let start = Instant::now();
    let mut rng = Rng::new(a.seed);
    let (assignment, s_hat, converged) = match a.method {
        Method::Ipursuit => {
            let out = ipursuit(&d, a.k, a.q, &solver, policy, &mut rng)?;
            let conv = out.directions.converged.iter().filter(|&&c| c).count();
            (out.assignment, Some(out.s_hat), Some(conv))
        }
        Method::Tsc => (tsc_baseline(&d, a.k, a.q, &mut rng)?, None, None),
        Method::Kmeans => (kmeans_baseline(&d, a.k, &mut rng)?, None, None),
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let accuracy = d
        .labels()
        .map(|truth| clustering_accuracy(&assignment.labels, truth))
        .transpose()?;

    let config = ClusterConfig {
        input: display(&a.input),
        k: a.k,
        q: a.q,
        enhance: policy,
        method: a.method,
        seed: a.seed,
        solver,
    };
    let metrics = ClusterMetrics {
        accuracy,
        n_points: d.len(),
        ambient_dim: d.ambient_dim(),
        s_hat,
        directions_converged: converged,
        cluster_sizes: cluster_sizes(&assignment.labels, a.k),
    };
    let mut record = ResultRecord::new("cluster", Some(a.seed), &config, &metrics)?;
    if a.timing {
        record.elapsed_ms = Some(elapsed);
    }
    let json = record.to_json()?;
    let labels = labels_to_string(&assignment.labels);

    if let Some(acc) = accuracy {
        eprintln!("accuracy: {acc:.6}");
    }
    match &a.labels_out {
        Some(p) => write_file(p, &labels)?,
        None => print!("{labels}"),
    }
    if let Some(p) = &a.out {
        write_file(p, &json)?;
    }
    Ok(())
}

fn sweep_plan(a: &SweepArgs) -> Result<SweepPlan, CliError> {
    let explicit = a.ambient.is_some()
        || a.clusters.is_some()
        || a.m_rule.is_some()
        || a.s_list.is_some()
        || a.k_list.is_some();
    let mut plan = match a.preset {
        Some(_) if explicit => {
            return Err(usage("--preset cannot be combined with --M, --K, --m-rule, --s-list or --k-list"))
        }
        Some(crate::args::Preset::Fig2a) => SweepPlan::fig2a(),
        Some(crate::args::Preset::Fig2b) => SweepPlan::fig2b(),
        None => {
            let ambient = a.ambient.ok_or_else(|| usage("--M is required without --preset"))?;
            let m_rule = MRule::parse(a.m_rule.as_deref().ok_or_else(|| usage("--m-rule is required"))?)
                .map_err(usage)?;
            let axis = match (&a.s_list, &a.k_list) {
                (Some(s), None) => Axis::S {
                    k: a.clusters.ok_or_else(|| usage("--K is required with --s-list"))?,
                    values: parse_list(s).map_err(usage)?,
                },
                (s, Some(k)) => {
                    if a.clusters.is_some() {
                        return Err(usage("--K and --k-list are mutually exclusive"));
                    }
                    let s = match s.as_deref().map(parse_list).transpose().map_err(usage)? {
                        Some(v) if v.len() == 1 => v[0],
                        Some(_) => return Err(usage("--k-list needs a single value in --s-list")),
                        None => return Err(usage("--k-list needs --s-list with one value")),
                    };
                    Axis::K {
                        s,
                        values: parse_list(k).map_err(usage)?,
                    }
                }
                (None, None) => return Err(usage("give --s-list or --k-list")),
            };
            let mut plan = SweepPlan::fig2a();
            plan.ambient_dim = ambient;
            plan.axis = axis;
            plan.m_rule = m_rule;
            plan
        }
    };
    plan.n_per_cluster = a.n_per_cluster;
    plan.trials = a.trials;
    plan.seed = a.seed;
    plan.shat_offset = a.shat_offset;
    plan.q = a.q;
    plan.solver = SolverConfig::default().with_tolerance(a.tol);
    plan.validate().map_err(usage)?;
    Ok(plan)
}

pub fn synth_sweep(a: SweepArgs) -> Result<(), CliError> {
    let plan = sweep_plan(&a)?;
    let rows = run_sweep(&plan)?;
    let csv = to_csv_string(&rows)?;
    let record = ResultRecord::new("synth-sweep", Some(plan.seed), &plan, &rows)?;
    write_file(&a.out, &csv)?;
    write_file(&sidecar_path(&a.out), &record.to_json()?)?;
    eprintln!("wrote {} rows to {}", rows.len(), display(&a.out));
    Ok(())
}

#[derive(Serialize)]
struct RatioConfig<'a> {
    ambient_dim: usize,
    k: usize,
    s_list: &'a [usize],
    m_ratio: f64,
    trials: usize,
    seed: u64,
    sqrt_convention: bool,
}

#[derive(Serialize)]
struct RatioCsvRow {
    s: usize,
    m: usize,
    #[serde(rename = "T")]
    t_limit: f64,
    mean_ratio: f64,
    min_ratio: f64,
    max_ratio: f64,
}

#[derive(Serialize)]
struct RatioSqrtCsvRow {
    s: usize,
    m: usize,
    #[serde(rename = "T")]
    t_limit: f64,
    mean_ratio: f64,
    min_ratio: f64,
    max_ratio: f64,
    sqrt_mean_ratio: f64,
    sqrt_min_ratio: f64,
    sqrt_max_ratio: f64,
}

fn validate_ratio(a: &RatioArgs, s_list: &[usize]) -> Result<(), CliError> {
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    if a.clusters < 2 {
        return Err(usage("--K must be at least 2"));
    }
    if !(a.m_ratio.is_finite() && a.m_ratio > 1.0) {
        return Err(usage("--m-ratio must exceed 1"));
    }
    for &s in s_list {
        let exact = a.m_ratio * s as f64;
        let m = exact.round() as usize;
        if s == 0 || (exact - m as f64).abs() > 1e-9 {
            return Err(usage(format!("m = {}·{s} is not a positive integer", a.m_ratio)));
        }
        let need = a.clusters * (m - s) + s;
        if need > a.ambient {
            return Err(usage(format!("s={s}: K(m-s)+s = {need} exceeds M = {}", a.ambient)));
        }
    }
    Ok(())
}

pub fn ratio_experiment(a: RatioArgs) -> Result<(), CliError> {
    let s_list = parse_list(&a.s_list).map_err(usage)?;
    validate_ratio(&a, &s_list)?;
    let rows = run_ratio(a.ambient, a.clusters, &s_list, a.m_ratio, a.trials, &Rng::new(a.seed))?;
    let base = |r: &ipursuit::theory::RatioRow| RatioCsvRow {
        s: r.s,
        m: r.m,
        t_limit: r.t_limit,
        mean_ratio: r.squared.mean,
        min_ratio: r.squared.min,
        max_ratio: r.squared.max,
    };
    let csv = if a.sqrt_convention {
        let out: Vec<RatioSqrtCsvRow> = rows
            .iter()
            .map(|r| RatioSqrtCsvRow {
                s: r.s,
                m: r.m,
                t_limit: r.t_limit,
                mean_ratio: r.squared.mean,
                min_ratio: r.squared.min,
                max_ratio: r.squared.max,
                sqrt_mean_ratio: r.sqrt.mean,
                sqrt_min_ratio: r.sqrt.min,
                sqrt_max_ratio: r.sqrt.max,
            })
            .collect();
        to_csv_string(&out)?
    } else {
        to_csv_string(&rows.iter().map(base).collect::<Vec<_>>())?
    };
    let config = RatioConfig {
        ambient_dim: a.ambient,
        k: a.clusters,
        s_list: &s_list,
        m_ratio: a.m_ratio,
        trials: a.trials,
        seed: a.seed,
        sqrt_convention: a.sqrt_convention,
    };
    let record = ResultRecord::new("ratio-experiment", Some(a.seed), &config, &rows)?;
    write_file(&a.out, &csv)?;
    write_file(&sidecar_path(&a.out), &record.to_json()?)?;
    eprintln!("wrote {} rows to {}", rows.len(), display(&a.out));
    Ok(())
}

/// Ensemble description for `theory-check --ensemble`: basis vectors of the
/// intersection and of each innovation subspace, each of length `M`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleFile {
    #[serde(default)]
    pub intersection: Vec<Vec<f64>>,
    pub innovations: Vec<Vec<Vec<f64>>>,
}

impl EnsembleFile {
    fn block(vectors: &[Vec<f64>], m: usize, name: &str) -> Result<Matrix, CliError> {
        if let Some(v) = vectors.iter().find(|v| v.len() != m) {
            return Err(usage(format!("{name} vector has length {}, data has M = {m}", v.len())));
        }
        Ok(Matrix::from_fn(m, vectors.len(), |i, j| vectors[j][i]))
    }

    pub fn build(&self, m: usize) -> Result<SubspaceEnsemble, CliError> {
        let u = Self::block(&self.intersection, m, "intersection")?;
        let inn = self
            .innovations
            .iter()
            .enumerate()
            .map(|(k, b)| Self::block(b, m, &format!("innovation {k}")))
            .collect::<Result<Vec<_>, _>>()?;
        make_ensemble_deterministic(&u, &inn).map_err(|e| usage(format!("invalid ensemble: {e}")))
    }
}

#[derive(Serialize)]
struct TheoryConfig {
    source: &'static str,
    ambient_dim: Option<usize>,
    k: Option<usize>,
    m: Option<usize>,
    s: Option<usize>,
    n: Option<usize>,
    kappa: Option<f64>,
    ensemble_kind: EnsembleKind,
    input: Option<String>,
    ensemble: Option<String>,
    q: usize,
    seed: u64,
    solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryMetrics {
    pub ensemble: EnsembleShape,
    pub n_points: usize,
    pub report: TheoryReport,
    pub pipeline_accuracy: f64,
}

fn synthetic_inputs(a: &TheoryArgs) -> Result<(SubspaceEnsemble, DataMatrix), CliError> {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| usage(format!("{flag} is required without --input")));
    let (big_m, k, m, s, n) = (
        need(a.ambient, "--M")?,
        need(a.clusters, "--K")?,
        need(a.m, "--m")?,
        need(a.s, "--s")?,
        need(a.n, "--n")?,
    );
    if k == 0 || n == 0 {
        return Err(usage("--K and --n must be at least 1"));
    }
    if !(s < m && m <= big_m) || k * (m - s) + s > big_m {
        return Err(usage(format!("need s < m and K(m-s)+s <= M, got M={big_m}, K={k}, m={m}, s={s}")));
    }
    let root = Rng::new(a.seed);
    let ens = match a.ensemble_kind {
        EnsembleKind::Random => make_ensemble_fully_random(big_m, k, m, s, &mut root.split(0))?,
        EnsembleKind::Orthogonal => canonical_ensemble(big_m, k, m, s)?,
    };
    let d = sample_points(&ens, n, &mut root.split(1))?;
    Ok((ens, d))
}

fn file_inputs(a: &TheoryArgs, input: &Path) -> Result<(SubspaceEnsemble, DataMatrix), CliError> {
    if a.ambient.is_some() || a.clusters.is_some() || a.m.is_some() || a.s.is_some() || a.n.is_some() {
        return Err(usage("--input takes its dimensions from the data; drop --M/--K/--m/--s/--n"));
    }
    let ens_path = a
        .ensemble
        .as_ref()
        .ok_or_else(|| usage("--input needs --ensemble describing the subspaces"))?;
    let text = std::fs::read_to_string(ens_path).map_err(|e| usage(format!("cannot read {}: {e}", display(ens_path))))?;
    let file: EnsembleFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("bad ensemble file {}: {e}", display(ens_path))))?;
    let d = load_csv(input)?;
    let ens = file.build(d.ambient_dim())?;
    let labels = d.labels().ok_or_else(|| usage("theory-check needs a `label` column in the input"))?;
    if let Some(&l) = labels.iter().find(|&&l| l >= ens.num_clusters()) {
        return Err(usage(format!("label {l} has no matching innovation block")));
    }
    Ok((ens, d))
}

pub fn theory_check(a: TheoryArgs) -> Result<(), CliError> {
    if let Some(kap) = a.kappa {
        if !(kap > 0.0 && kap < 1.0) {
            return Err(usage("--kappa must lie in (0, 1)"));
        }
    }
    if a.q == 0 {
        return Err(usage("--q must be at least 1"));
    }
    let solver = solver_with(a.tol)?;
    let (ens, d) = match &a.input {
        Some(p) => file_inputs(&a, p)?,
        None => synthetic_inputs(&a)?,
    };
    let k = ens.num_clusters();
    if a.q >= d.len() || k > d.len() {
        return Err(usage(format!("{} points are too few for K={k}, q={}", d.len(), a.q)));
    }

    let report = theory_report(&ens, &d, a.kappa)?;
    let out = ipursuit(&d, k, a.q, &solver, EnhancePolicy::None, &mut Rng::new(a.seed).split(2))?;
    let pipeline_accuracy = clustering_accuracy(&out.assignment.labels, d.labels().expect("labels checked"))?;

    let config = TheoryConfig {
        source: if a.input.is_some() { "csv" } else { "synthetic" },
        ambient_dim: a.ambient,
        k: a.clusters,
        m: a.m,
        s: a.s,
        n: a.n,
        kappa: a.kappa,
        ensemble_kind: a.ensemble_kind,
        input: a.input.as_deref().map(display),
        ensemble: a.ensemble.as_deref().map(display),
        q: a.q,
        seed: a.seed,
        solver,
    };
    let metrics = TheoryMetrics {
        ensemble: EnsembleShape::from(&ens),
        n_points: d.len(),
        report,
        pipeline_accuracy,
    };
    let record = ResultRecord::new("theory-check", Some(a.seed), &config, &metrics)?;
    write_file(&a.out, &record.to_json()?)?;
    eprintln!(
        "theorem1_ok: {}, pipeline accuracy: {pipeline_accuracy:.6}",
        metrics.report.theorem1_ok
    );
    Ok(())
}

#[derive(Serialize)]
struct SvRow {
    index: usize,
    singular_value: f64,
}

#[derive(Serialize)]
struct SvConfig {
    input: String,
    top: usize,
    shat_cap: usize,
    gap_threshold: f64,
}

#[derive(Serialize)]
struct SvMetrics {
    s_hat: usize,
    rank: usize,
    singular_values: Vec<f64>,
}

pub fn singular_values(a: SingularArgs) -> Result<(), CliError> {
    if a.top == 0 {
        return Err(usage("--top must be at least 1"));
    }
    let d = load_csv(&a.input)?;
    let sv = svals(d.points())?;
    let s_hat = recommend_shat(&sv)?;
    let shown: Vec<f64> = sv.iter().take(a.top).copied().collect();
    let rows: Vec<SvRow> = shown
        .iter()
        .enumerate()
        .map(|(i, &v)| SvRow {
            index: i + 1,
            singular_value: v,
        })
        .collect();
    let config = SvConfig {
        input: display(&a.input),
        top: a.top,
        shat_cap: DEFAULT_SHAT_CAP,
        gap_threshold: DEFAULT_GAP_THRESHOLD,
    };
    let metrics = SvMetrics {
        s_hat,
        rank: numerical_rank(&sv),
        singular_values: shown,
    };
    let record = ResultRecord::new("singular-values", None, &config, &metrics)?;
    write_file(&a.out, &to_csv_string(&rows)?)?;
    write_file(&sidecar_path(&a.out), &record.to_json()?)?;
    println!("recommended s_hat: {s_hat}");
    Ok(())
}
