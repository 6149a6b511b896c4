//! `bassnet`: stochastic Bass diffusion on networks from the command line.
//!
//! Exit codes: 0 when everything requested succeeded (for `bounds`, that
//! includes zero violations), 1 for runtime/check failures, 2 for flag
//! validation failures.

mod commands;
mod svg;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters: exit code 2.
    Validation(String),
    /// I/O or solver failure: exit code 1.
    Runtime(String),
    /// A requested check did not pass: exit code 1.
    ChecksFailed(String),
}

impl CliError {
    fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
    fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

impl From<bassnet_core::io::IoError> for CliError {
    fn from(e: bassnet_core::io::IoError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<bassnet_core::network::NetworkError> for CliError {
    fn from(e: bassnet_core::network::NetworkError) -> Self {
        use bassnet_core::network::NetworkError;
        match e {
            NetworkError::InvalidParams(_) => CliError::Validation(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<bassnet_core::exact::ExactError> for CliError {
    fn from(e: bassnet_core::exact::ExactError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<bassnet_core::montecarlo::McError> for CliError {
    fn from(e: bassnet_core::montecarlo::McError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<bassnet_core::bounds::BoundsError> for CliError {
    fn from(e: bassnet_core::bounds::BoundsError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "bassnet",
    version,
    about = "Stochastic Bass diffusion on weighted directed networks",
    long_about = "Generates networks, computes exact and Monte Carlo adoption curves, \
verifies the universal two-node/Bass bounds, quantifies the bound gap, and \
reproduces the four bound-gap panels."
)]
struct Cli {
    /// Worker threads for parallel commands; never affects results
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a named network family as JSON
    Gen(GenArgs),
    /// Exact adoption curve via the master-equation solver (M <= 20)
    Exact(ExactArgs),
    /// Monte Carlo adoption curve estimate
    Mc(McArgs),
    /// Verify the universal bounds on a stored curve
    Bounds(BoundsArgs),
    /// Half-life gap metrics across q/p ratios
    Gap(GapArgs),
    /// Sample random homogeneous networks against the complete network
    Conjecture(ConjectureArgs),
    /// Reproduce the four bound-gap panels as SVG + backing CSV
    Figure1(Figure1Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Complete,
    Circle,
    Grid,
    Pairs,
    ErdosRenyi,
    ScaleFree,
    SmallWorld,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SidedArg {
    One,
    Two,
}

#[derive(clap::Args)]
pub struct GenArgs {
    /// Network family
    #[arg(long, value_enum)]
    family: FamilyKind,
    /// Node count (complete, circle, pairs, erdos-renyi, scale-free, small-world)
    #[arg(long = "M")]
    m: Option<usize>,
    /// External influence rate p_j for every node
    #[arg(long = "p", default_value_t = 0.01)]
    p: f64,
    /// Total internal in-weight q_j for every node
    #[arg(long = "q", default_value_t = 0.1)]
    q: f64,
    /// Circle orientation
    #[arg(long, value_enum, default_value = "two")]
    sided: SidedArg,
    /// Torus dimension (grid)
    #[arg(long = "D")]
    dim: Option<usize>,
    /// Torus side length (grid)
    #[arg(long)]
    side: Option<usize>,
    /// Mean degree of the Erdos-Renyi skeleton
    #[arg(long)]
    lambda: Option<f64>,
    /// Edges attached per new node (scale-free)
    #[arg(long)]
    m_attach: Option<usize>,
    /// Ring-lattice degree before rewiring (small-world, even)
    #[arg(long)]
    k: Option<usize>,
    /// Rewiring probability (small-world)
    #[arg(long)]
    rewire_prob: Option<f64>,
    /// Seed for the random families
    #[arg(long, env = "BASSNET_SEED", default_value_t = 42)]
    seed: u64,
    /// Output network JSON path
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(clap::Args)]
pub struct ExactArgs {
    /// Input network JSON
    #[arg(long)]
    net: PathBuf,
    /// Time horizon
    #[arg(long)]
    t_max: f64,
    /// Grid intervals between 0 and t-max (the curve has points+1 rows)
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Relative/absolute solver tolerance
    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,
    /// Output curve CSV (default: `<net stem>.exact.csv`)
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct McArgs {
    /// Input network JSON
    #[arg(long)]
    net: PathBuf,
    /// Time horizon
    #[arg(long)]
    t_max: f64,
    /// Grid intervals between 0 and t-max
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Number of independent trajectories
    #[arg(long)]
    runs: usize,
    /// Base seed; trajectory i uses mix(seed, i)
    #[arg(long, env = "BASSNET_SEED", default_value_t = 42)]
    seed: u64,
    /// Also estimate per-node adoption probabilities
    #[arg(long)]
    per_node: bool,
    /// Output curve CSV (default: `<net stem>.mc.csv`)
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct BoundsArgs {
    /// Input curve CSV (sidecar `.meta.json` must exist unless --net is given)
    #[arg(long)]
    curve: PathBuf,
    /// Network JSON for the inhomogeneous min/max envelope check
    #[arg(long)]
    net: Option<PathBuf>,
    /// Output report CSV (default: `<curve stem>.report.csv`)
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct GapArgs {
    /// External rate p; curve shapes depend only on q/p under time rescaling
    #[arg(long = "p", default_value_t = 0.01)]
    p: f64,
    /// Comma-separated q/p ratios
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    /// Output CSV (default: gap.csv)
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct ConjectureArgs {
    /// Node count (exact-solver cap applies)
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "p", default_value_t = 0.01)]
    p: f64,
    #[arg(long = "q", default_value_t = 0.1)]
    q: f64,
    /// Number of sampled networks
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, env = "BASSNET_SEED", default_value_t = 42)]
    seed: u64,
    /// Output CSV (default: conjecture.csv)
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct Figure1Args {
    /// Output directory for the SVGs and backing CSVs
    #[arg(long, default_value = "figure1")]
    out_dir: PathBuf,
    /// External rate p (panels are parameter-free in p up to time rescaling)
    #[arg(long = "p", default_value_t = 0.01)]
    p: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        builder = builder.num_threads(threads);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot build thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Exact(args) => commands::exact(args),
        Command::Mc(args) => commands::mc(args),
        Command::Bounds(args) => commands::bounds(args),
        Command::Gap(args) => commands::gap(args),
        Command::Conjecture(args) => commands::conjecture(args),
        Command::Figure1(args) => commands::figure1(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) | Err(CliError::ChecksFailed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
