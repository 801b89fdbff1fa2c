use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Subspace clustering by innovation pursuit: cluster data files, rerun the
/// synthetic experiments, and evaluate the recovery conditions.
#[derive(Debug, Parser)]
#[command(name = "ipursuit", version)]
pub struct Cli {
    /// Worker threads; defaults to $IPURSUIT_WORKERS, then to all cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster the rows of a CSV file.
    Cluster(ClusterArgs),
    /// Accuracy of plain and enhanced clustering over a grid of synthetic ensembles.
    SynthSweep(SweepArgs),
    /// Smallest principal angle between random subspaces against its limiting value.
    RatioExperiment(RatioArgs),
    /// Evaluate every recovery condition and bound for one dataset.
    TheoryCheck(TheoryArgs),
    /// Singular values of a CSV dataset and the suggested number to remove.
    SingularValues(SingularArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ipursuit,
    Tsc,
    Kmeans,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Number of clusters.
    #[arg(long)]
    pub k: usize,
    /// `auto`, `none`, or the number of dominant directions to remove.
    #[arg(long, default_value = "none")]
    pub enhance: String,
    /// Affinity entries kept per row.
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Ipursuit)]
    pub method: Method,
    /// Primal and dual stopping tolerance of the direction solver.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// JSON result record.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// One label per line in input order; stdout when omitted.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
    /// Include wall-clock time in the result record.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Growing intersection: M=60, K=10, m=s+2, s=10..40.
    Fig2a,
    /// Growing cluster count: M=60, s=40, m=42, K=5..10.
    Fig2b,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Ambient dimension.
    #[arg(long = "M")]
    pub ambient: Option<usize>,
    /// Number of clusters (fixed when sweeping s).
    #[arg(long = "K")]
    pub clusters: Option<usize>,
    /// Subspace dimension: `s+OFFSET` or a fixed integer.
    #[arg(long)]
    pub m_rule: Option<String>,
    /// Intersection dimensions, `a:b:step` or comma separated.
    #[arg(long)]
    pub s_list: Option<String>,
    /// Cluster counts, `a:b:step` or comma separated (needs a single s).
    #[arg(long)]
    pub k_list: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub n_per_cluster: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Enhanced runs remove `s - OFFSET` directions.
    #[arg(long, default_value_t = 5)]
    pub shat_offset: usize,
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long = "M", default_value_t = 10_000)]
    pub ambient: usize,
    #[arg(long = "K", default_value_t = 10)]
    pub clusters: usize,
    #[arg(long, default_value = "10:300:10")]
    pub s_list: String,
    #[arg(long, default_value_t = 1.5)]
    pub m_ratio: f64,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also emit cos θ₁ / √T columns.
    #[arg(long)]
    pub sqrt_convention: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    /// Uniformly random intersection and innovations.
    Random,
    /// Coordinate blocks: mutually orthogonal innovations.
    Orthogonal,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long = "M")]
    pub ambient: Option<usize>,
    #[arg(long = "K")]
    pub clusters: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    /// Points per cluster.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, value_enum, default_value_t = EnsembleKind::Random)]
    pub ensemble_kind: EnsembleKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Labeled CSV data instead of a synthetic draw; requires --ensemble.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON file with `intersection` and `innovations` basis vectors.
    #[arg(long)]
    pub ensemble: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SingularArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub top: usize,
}
