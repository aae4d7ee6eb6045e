use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(name = "spinchain-echo", version, about = "Coherence factor of three qubits coupled to an XY spin chain")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Chain length N (odd, >= 3)
    #[arg(long, global = true)]
    pub n: Option<usize>,

    /// Anisotropy γ
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,

    /// Transverse field λ
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,

    /// Qubit–chain coupling g
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub g: Option<f64>,

    /// Basis pair `j,j'` (1..=8)
    #[arg(long, global = true)]
    pub pair: Option<String>,

    /// Initial chain state: ground | polarized
    #[arg(long, global = true)]
    pub initial: Option<String>,

    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Data file format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Flat key = value (TOML) file; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// |F(t)| on a time grid
    Coherence(CoherenceArgs),
    /// Data and gnuplot script for one of the standard figures
    Figure(FigureArgs),
    /// Compare the closed form against the per-mode matrix oracle
    OracleCheck(OracleArgs),
    /// Residual of the near-critical scaling rule in both modes
    ScalingCheck(ScalingArgs),
    /// Reduced three-qubit density matrix and entanglement measures
    State(StateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CoherenceArgs {
    /// Time grid `start:stop:step`
    #[arg(long)]
    pub t: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FigureArgs {
    /// 3.1 | 3.2 | 3.3 | 3.4-3.5 (or lambda-sweep, size-scan, gamma-sweep, scaling)
    pub id: String,

    #[arg(long)]
    pub t: Option<String>,

    #[arg(long = "lambda-range")]
    pub lambda_range: Option<String>,

    #[arg(long = "gamma-range")]
    pub gamma_range: Option<String>,

    /// Chain lengths, comma separated
    #[arg(long)]
    pub sizes: Option<String>,

    /// Scale factor for the scaling figure
    #[arg(long)]
    pub m: Option<f64>,

    /// scale-n | scale-gamma
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub t: Option<String>,

    /// Chain lengths to check (defaults to --n)
    #[arg(long)]
    pub sizes: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScalingArgs {
    #[arg(long)]
    pub t: Option<String>,

    #[arg(long)]
    pub m: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct StateArgs {
    /// `ghz`, `w`, or eight `re,im` pairs separated by `;`
    #[arg(long)]
    pub state: Option<String>,

    /// Evaluation time
    #[arg(long)]
    pub t: Option<f64>,
}
