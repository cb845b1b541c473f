use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fermi-stability", version, about = "Stability constants, charge forms and trial-charge scans for N fermions plus one distinct particle")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Absolute tolerance of the adaptive quadrature.
    #[arg(long, global = true, default_value_t = 1e-14)]
    pub abs_tol: f64,
    /// Subdivision budget of the adaptive quadrature.
    #[arg(long, global = true, default_value_t = 2000)]
    pub max_subdivisions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical mass ratio m*(N), the root of Λ(m, N) = 1.
    CriticalMass {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1e-10, allow_hyphen_values = true)]
        tol: f64,
    },
    /// Λ(m, N), Γ(m, N) and the stability regime.
    Lambda {
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
        #[arg(long)]
        n: usize,
    },
    /// Table of the symbol S_l(k) on an equispaced k grid.
    Kernel {
        #[arg(long)]
        l: usize,
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        k_max: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Charge quadratic forms.
    #[command(subcommand)]
    Form(FormCommand),
    /// Trial-charge energy scans.
    #[command(subcommand)]
    Instability(InstabilityCommand),
    /// Cut-off renormalisation checks.
    #[command(subcommand)]
    Renorm(RenormCommand),
}

#[derive(Debug, Subcommand)]
pub enum FormCommand {
    /// Exact form at N = 2 for a single-channel charge.
    TwoBody {
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda: f64,
        /// `q-gamma:<γ>`, `gauss-l1`, or a CSV file with columns p, g(p).
        #[arg(long)]
        charge: String,
        /// Angular momentum of a charge read from file.
        #[arg(long, default_value_t = 1)]
        l: usize,
    },
    /// Monte Carlo form of the Slater trial charge at N = 3.
    SlaterMc {
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
        #[arg(long, default_value_t = 3)]
        n_fermions: usize,
        #[arg(long, allow_hyphen_values = true)]
        n: f64,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 10_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum InstabilityCommand {
    /// E(n) = F_1[Q_{n,γ}] along n for each γ, with a divergence verdict.
    Scan {
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
        #[arg(long)]
        n_fermions: usize,
        /// `start:stop:step` or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        gamma_grid: String,
        /// Comma-separated list of n.
        #[arg(long, allow_hyphen_values = true)]
        n_list: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum RenormCommand {
    /// Residual of the cut-off integral against 4πR - L_λ.
    Check {
        /// Comma-separated list of cut-off radii.
        #[arg(long, allow_hyphen_values = true)]
        r_list: String,
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        /// Spectator momenta `x,y,z;x,y,z;...` (default: one zero momentum).
        #[arg(long, allow_hyphen_values = true)]
        spectators: Option<String>,
    },
}
