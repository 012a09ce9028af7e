use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "catforge", version, about = "Design and simulate double-XPM cat-state generation")]
pub struct Cli {
    /// key=value file mirroring the command-line flags; flags win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the interaction time and input intensity
    Design(DesignArgs),
    /// Tabulate C(τ) or G(τ) over a τ grid
    Curve(CurveArgs),
    /// Run the sliced dyad engine through the full scheme
    Simulate(SimulateArgs),
    /// Cross-check engine and closed form against the Fock-space integrator
    Verify(VerifyArgs),
    /// Efficiency of telling two coherent states apart
    Discriminate(DiscriminateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitModeArg {
    Radians,
    CompatDegrees,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub fidelity: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma_ratio: Option<f64>,
    #[arg(long, value_enum, default_value = "radians")]
    pub unit_mode: UnitModeArg,
    /// Solve every Γ of the standard table (F and |β| default to 0.99 and 1.6)
    #[arg(long)]
    pub table: bool,
    /// Photon damping rate γ in 1/s; adds t_int_seconds
    #[arg(long)]
    pub damping_rate: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveKindArg {
    C,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveFormat {
    Csv,
    Svg,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_enum)]
    pub kind: CurveKindArg,
    /// Input amplitude |α| for C curves
    #[arg(long, default_value_t = 200.0)]
    pub alpha: f64,
    /// Comma-separated Γ values [default: 0.5,1,1.5 for c; 0.01,5,10 for g]
    #[arg(long, value_delimiter = ',')]
    pub gamma_ratios: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    pub tau_min: f64,
    /// [default: 0.1 for c, 1 for g]
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: CurveFormat,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QubitLossArg {
    Neglect,
    CommonDecay,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Input amplitude as "re" or "re,im"
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long)]
    pub gamma_ratio: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Lossless run with Kerr angle χt = THETA instead of Γ and τ
    #[arg(long, value_name = "THETA", conflicts_with_all = ["gamma_ratio", "tau"])]
    pub lossless_theta: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub slices: usize,
    /// "t2/t1,phi": second channel runs t2/t1 times longer, extra phase phi on V
    #[arg(long, allow_hyphen_values = true)]
    pub asymmetry: Option<String>,
    #[arg(long, value_enum, default_value = "neglect")]
    pub qubit_loss: QubitLossArg,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Input amplitude as "re" or "re,im"; |α| ≤ 2
    #[arg(long, default_value = "1.5", allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long, default_value_t = 1.0)]
    pub gamma_ratio: f64,
    #[arg(long, default_value_t = 0.2)]
    pub tau: f64,
    /// Fock levels kept per mode
    #[arg(long, default_value_t = 20)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 2000)]
    pub slices: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiscriminateArgs {
    /// "re,im"
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_a: String,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_b: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
