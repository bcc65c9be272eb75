//! `plugin-fdr` command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 verification failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "plugin-fdr", version, about = "Null-proportion estimation and plug-in BH")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate m0 and pi0 from a p-value file.
    Estimate(EstimateArgs),
    /// Run (plug-in) Benjamini-Hochberg on a p-value file.
    Bh(BhArgs),
    /// Fisher's exact test on a file of 2x2 tables.
    Fet(FetArgs),
    /// Replicated simulation experiments.
    Simulate(SimulateArgs),
    /// Oracle and Monte Carlo verification suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct AdjustOpts {
    /// Null supports JSON (array of {"atoms": [..], "cdf": [..]}).
    #[arg(long)]
    pub supports: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AdjustArg::None)]
    pub adjust: AdjustArg,
    /// Monte Carlo size of the randomized adjustment.
    #[arg(long, default_value_t = 1000)]
    pub rand_reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Allow randomizing estimators without the plug-in guarantee.
    #[arg(long)]
    pub allow_no_guarantee: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjustArg {
    None,
    Du,
    Mid,
    Rand,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// P-value CSV with column `p` (optional `support_index`, `is_null`).
    #[arg(long)]
    pub input: PathBuf,
    /// Estimator as JSON, a JSON file, or shorthand (storey[:λ], pc_new,
    /// pc_legacy, pc_zzd, poly:r:λ). Repeatable.
    #[arg(long = "estimator")]
    pub estimators: Vec<String>,
    #[command(flatten)]
    pub adjust: AdjustOpts,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BhArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Plug-in estimator; plain BH without it.
    #[arg(long)]
    pub estimator: Option<String>,
    #[command(flatten)]
    pub adjust: AdjustOpts,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlternativeArg {
    Greater,
    TwoSided,
}

#[derive(Args, Debug)]
pub struct FetArgs {
    /// CSV with columns a,b,c,d.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = AlternativeArg::TwoSided)]
    pub alternative: AlternativeArg,
    /// Write the distinct null supports here; the p-value output refers to
    /// them through `support_index`.
    #[arg(long)]
    pub emit_supports: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimKind {
    Gaussian,
    Fet,
    Dirac,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub kind: SimKind,
    /// JSON object or array of objects: setting fields plus optional
    /// `estimators`, `adjustments` or `entries`.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the seed of every config point.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub rand_reps: usize,
    #[arg(long)]
    pub allow_no_guarantee: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyKind {
    Imc,
    Orders,
    Bounds,
    PcCompare,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub kind: VerifyKind,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replications of the inverse-moment checks.
    #[arg(long, default_value_t = 100_000)]
    pub imc_replications: usize,
    /// Samples of the Irwin-Hall estimates.
    #[arg(long, default_value_t = 1_000_000)]
    pub irwin_hall_samples: usize,
    /// Samples of the PC comparison.
    #[arg(long, default_value_t = 100_000)]
    pub pc_samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Estimate(a) => commands::estimate(a),
        Command::Bh(a) => commands::bh(a),
        Command::Fet(a) => commands::fet(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify(a),
    };
    match outcome {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::VerificationFailed) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
