use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "subgauss",
    version,
    about = "Potential theory, heat kernels and scale audits on weighted graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph family and write it as an edge list.
    Gen(GenArgs),
    /// Audit volume, p0, Poincaré, capacity, exit-time and heat-kernel conditions.
    Audit(AuditArgs),
    /// Heat-kernel values or sub-Gaussian band statistics as CSV.
    Heatkernel(HeatKernelArgs),
    /// Replay the exit-time level-set argument at one centre and radius.
    Trace(TraceArgs),
    /// Fit a growth exponent.
    Fit(FitArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Lattice,
    Sierpinski,
    Vicsek,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Center {
    Auto,
    Id(usize),
}

impl FromStr for Center {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Center::Auto);
        }
        s.parse()
            .map(Center::Id)
            .map_err(|_| format!("expected `auto` or a vertex id, got `{s}`"))
    }
}

#[derive(Debug, Args)]
pub struct FamilyParams {
    /// Lattice dimension.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Lattice side length.
    #[arg(long, default_value_t = 65)]
    pub side: usize,
    /// Fractal level.
    #[arg(long, default_value_t = 5)]
    pub level: u32,
    /// Multiply each conductance by an independent uniform draw from [LO, HI].
    #[arg(long, value_name = "LO,HI", value_delimiter = ',')]
    pub perturb: Option<Vec<f64>>,
    /// Seed for --perturb.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Replace every edge by a path of K edges.
    #[arg(long, value_name = "K")]
    pub subdivide: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GraphSource {
    /// Edge-list file.
    #[arg(value_name = "GRAPH", required_unless_present = "family")]
    pub graph: Option<PathBuf>,
    /// Generate the graph instead of reading it.
    #[arg(long, conflicts_with = "graph")]
    pub family: Option<Family>,
    #[command(flatten)]
    pub params: FamilyParams,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub family: Family,
    #[command(flatten)]
    pub params: FamilyParams,
    /// Output file (stdout when absent).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, default_value = "auto")]
    pub center: Center,
    /// Walk dimension (fitted from exit times when absent).
    #[arg(long)]
    pub dw: Option<f64>,
    /// Volume growth exponent (fitted when absent).
    #[arg(long)]
    pub df: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<u64>>,
    /// Leave out the heat-kernel band check.
    #[arg(long)]
    pub no_heat_kernel: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeatKernelArgs {
    #[command(flatten)]
    pub graph: GraphSource,
    /// Starting vertex.
    #[arg(long, default_value = "auto")]
    pub source: Center,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<u64>>,
    /// Target vertices (spread over distances when absent).
    #[arg(long, value_delimiter = ',')]
    pub targets: Option<Vec<usize>>,
    /// Emit band statistics (n, y, d, xi, s) instead of kernel values.
    #[arg(long)]
    pub band: bool,
    #[arg(long)]
    pub dw: Option<f64>,
    #[arg(long)]
    pub df: Option<f64>,
    /// Largest ξ kept in the band fit.
    #[arg(long, default_value_t = 16.0)]
    pub xi_max: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, default_value = "auto")]
    pub center: Center,
    #[arg(long)]
    pub r: u64,
    #[arg(long)]
    pub dw: Option<f64>,
    #[arg(long)]
    pub df: Option<f64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FitTarget {
    Volume,
    Exit,
    Ondiag,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub what: FitTarget,
    #[arg(long, default_value = "auto")]
    pub center: Center,
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<u64>>,
    /// Walk dimension used for the default step list of `ondiag`.
    #[arg(long, default_value_t = 2.0)]
    pub dw: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
