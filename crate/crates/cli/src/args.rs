use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "hubbard-lax", version, about = "Lax structure and boundary-driven steady state of the Hubbard ladder")]
pub struct Cli {
    /// TOML file with default parameters; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory for result files. Without it the main JSON goes to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the Lax identities at random parameter points.
    Verify(VerifyArgs),
    /// Build the steady state and its diagnostics.
    Ness(NessArgs),
    /// Compare the steady state with the brute-force null space (n <= 3).
    Oracle(OracleArgs),
    /// Density profile, bond currents and finite-size scaling.
    Observe(ObserveArgs),
    /// Commutativity of transfer operators at random parameter pairs.
    Commute(CommuteArgs),
    /// Steady-state diagnostics over a grid of driving configurations.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DrivingArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "gammaL", allow_negative_numbers = true)]
    pub gamma_l: Option<f64>,
    #[arg(long = "gammaR", allow_negative_numbers = true)]
    pub gamma_r: Option<f64>,
    #[arg(long = "muL", allow_negative_numbers = true)]
    pub mu_l: Option<f64>,
    #[arg(long = "muR", allow_negative_numbers = true)]
    pub mu_r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Auxiliary cutoff; defaults depend on the command.
    #[arg(long = "K")]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Fix the interaction instead of sampling it.
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct NessArgs {
    #[command(flatten)]
    pub driving: DrivingArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Write rho as a binary dump to this file.
    #[arg(long)]
    pub dump_rho: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub driving: DrivingArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ObserveArgs {
    #[command(flatten)]
    pub driving: DrivingArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Chain lengths for the scaling fit.
    #[arg(long, value_delimiter = ',', default_value = "4,5,6,7,8")]
    pub sizes: Vec<usize>,
    /// Add fermionic occupations to the profile output.
    #[arg(long)]
    pub occupation: bool,
}

#[derive(Debug, Args)]
pub struct CommuteArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub pairs: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "1")]
    pub u: Vec<f64>,
    #[arg(long = "gammaL", value_delimiter = ',', allow_negative_numbers = true, default_value = "1")]
    pub gamma_l: Vec<f64>,
    #[arg(long = "gammaR", value_delimiter = ',', allow_negative_numbers = true, default_value = "1")]
    pub gamma_r: Vec<f64>,
    #[arg(long = "muL", value_delimiter = ',', allow_negative_numbers = true, default_value = "0")]
    pub mu_l: Vec<f64>,
    #[arg(long = "muR", value_delimiter = ',', allow_negative_numbers = true, default_value = "0")]
    pub mu_r: Vec<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}
