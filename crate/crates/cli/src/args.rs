use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tjdiv::DivergenceKind;

#[derive(Debug, Parser)]
#[command(name = "tjd", version, about = "Total Jensen divergences, centroids and clustering")]
pub struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one divergence between two points.
    Divergence(DivergenceArgs),
    /// Orthogonal projection onto the chord and the geometric check.
    Project(ProjectArgs),
    /// Total Jensen centroid of a weighted CSV point set.
    Centroid(CentroidArgs),
    /// Influence function table of the symmetric Jensen centroid.
    Influence(InfluenceArgs),
    /// Total Jensen k-means++ seeding.
    Seed(ClusterCommon),
    /// Lloyd clustering with total Jensen centroids.
    Cluster(LloydArgs),
    /// Seeding potential against the discrete optimum and the plug-in bound.
    BoundExperiment(ExperimentArgs),
    /// Estimate the regularity constants of the seeding bound.
    Constants(ConstantsArgs),
    /// Triangle inequality check of the square-rooted total Jensen-Shannon divergence.
    MetricCheck(MetricArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    /// shannon, burg, bit, squared-euclidean or squared-mahalanobis.
    #[arg(long, default_value = "shannon")]
    pub generator: String,

    /// Row-major matrix for squared-mahalanobis, rows separated by `;`.
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct DivergenceArgs {
    #[arg(long, default_value = "total-jensen")]
    pub kind: DivergenceKind,

    #[command(flatten)]
    pub generator: GeneratorArgs,

    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub alpha: f64,

    /// Comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,

    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,

    #[arg(long, allow_hyphen_values = true)]
    pub mu1: Option<String>,

    #[arg(long, allow_hyphen_values = true)]
    pub sigma1: Option<String>,

    #[arg(long, allow_hyphen_values = true)]
    pub mu2: Option<String>,

    #[arg(long, allow_hyphen_values = true)]
    pub sigma2: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,

    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,

    #[arg(long, allow_hyphen_values = true)]
    pub p: String,

    #[arg(long, allow_hyphen_values = true)]
    pub q: String,

    /// Also compute the second-kind divergence at this chord parameter.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Right,
    Left,
}

#[derive(Debug, Clone, Args)]
pub struct CentroidArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,

    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,

    #[arg(long)]
    pub input: PathBuf,

    /// Name of the weight column.
    #[arg(long)]
    pub weights: Option<String>,

    #[arg(long, value_enum, default_value_t = Side::Right)]
    pub side: Side,

    #[arg(long, default_value_t = 20)]
    pub inner_iters: usize,

    #[arg(long, default_value_t = 1e-10)]
    pub outer_tol: f64,

    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,

    /// Start from this point instead of the barycenter.
    #[arg(long, allow_hyphen_values = true)]
    pub init: Option<String>,

    /// Report the two-stage result without the final descent on the loss.
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Debug, Clone, Args)]
pub struct InfluenceArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,

    #[arg(long)]
    pub p: f64,

    #[arg(long, default_value_t = 1e9)]
    pub ymax: f64,

    #[arg(long, default_value_t = 40)]
    pub per_decade: usize,

    /// Also recompute each contaminated centroid.
    #[arg(long)]
    pub empirical: bool,

    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,

    /// With --empirical, also report the total Jensen centroid displacement.
    #[arg(long)]
    pub total: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterCommon {
    #[arg(long)]
    pub input: PathBuf,

    #[command(flatten)]
    pub generator: GeneratorArgs,

    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,

    #[arg(long, default_value_t = 2)]
    pub k: usize,

    /// Generated and echoed when omitted.
    #[arg(long)]
    pub rng_seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct LloydArgs {
    #[command(flatten)]
    pub common: ClusterCommon,

    #[arg(long, default_value_t = 100)]
    pub max_rounds: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub common: ClusterCommon,

    #[arg(long, default_value_t = 2000)]
    pub trials: usize,

    /// The free constant of the plug-in bound, in (0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,

    /// Closure samples for the constant estimates.
    #[arg(long, default_value_t = 10000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    #[command(flatten)]
    pub common: ClusterCommon,

    #[arg(long, default_value_t = 10000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct MetricArgs {
    /// Hunt for further violations among random simplex triples.
    #[arg(long)]
    pub search: bool,

    #[arg(long, default_value_t = 100000)]
    pub trials: usize,

    /// Number of simplex coordinates in search mode.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,

    #[arg(long)]
    pub rng_seed: Option<u64>,
}
