//! `syl`: reproducible experiments on the radial solver, singular-set
//! checks and the near-`Σ` expansion. Exit codes: 0 ok, 2 configuration,
//! 3 convergence or failed solver invariants, 4 mathematical inconsistency.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "syl", version, about = "Negative-cone σ_k Loewner–Nirenberg experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the radial problem on an annulus and write <prefix>.csv / <prefix>.json.
    SolveAnnulus(SolveArgs),
    /// Check the boundary-of-cone condition, its roots and the k=2 curvature signs at a point of Σ.
    VerifySigma(VerifyArgs),
    /// Closed-form 3/2-power coefficient and its finite-difference verification.
    Expansion(ExpansionArgs),
    /// Fit the Hölder exponent of w′ at the junction of a saved solution.
    FitExponent(FitArgs),
    /// Solve a grid of annulus problems, optionally in parallel.
    Sweep(SweepArgs),
}

#[derive(Args, Serialize, Clone)]
pub struct SolveArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    /// Residual tolerance on σ_k = 1 at grid points.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Boundary cut-off distance; defaults to 1e-6·(b−a).
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long, default_value = "annulus")]
    pub out_prefix: PathBuf,
    /// Recorded in the report; the solver itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Serialize, Clone)]
pub struct VerifyArgs {
    /// SurfacePointData JSON.
    #[arg(long, conflicts_with = "from_solution", required_unless_present = "from_solution")]
    pub input: Option<PathBuf>,
    /// Prefix of a saved solution; the junction sphere supplies the point.
    #[arg(long)]
    pub from_solution: Option<PathBuf>,
    /// Defaults to the solution's k with --from-solution.
    #[arg(long)]
    pub k: Option<usize>,
    /// Seed for the random frame changes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random orthogonal frames in the invariance check.
    #[arg(long, default_value_t = 8)]
    pub frames: usize,
    #[arg(long, default_value = "verify-sigma.report.json")]
    pub report: PathBuf,
}

#[derive(Args, Serialize, Clone)]
pub struct ExpansionArgs {
    /// ExpansionInput JSON.
    #[arg(long, conflicts_with = "from_solution", required_unless_present = "from_solution")]
    pub input: Option<PathBuf>,
    /// Prefix of a saved k=2 solution; uses its junction sphere.
    #[arg(long)]
    pub from_solution: Option<PathBuf>,
    #[arg(long, default_value = "outer")]
    pub side: String,
    #[arg(long, default_value_t = 1.5)]
    pub p: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub dmin: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub dmax: f64,
    #[arg(long, default_value_t = 11)]
    pub points: usize,
    /// Also run the exponent scan over --p-grid.
    #[arg(long)]
    pub scan_p: bool,
    #[arg(long, value_delimiter = ',', default_value = "1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9")]
    pub p_grid: Vec<f64>,
    /// Per-point table (d, sigma1, sigma2, residual, cone).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "expansion.report.json")]
    pub report: PathBuf,
}

#[derive(Args, Serialize, Clone)]
pub struct FitArgs {
    /// Prefix of a saved solution.
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, default_value = "outer")]
    pub side: String,
    /// Plot-ready (log d, log |Δw′|) table; defaults to <prefix>.<side>.holder.csv.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to <prefix>.<side>.holder.json.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Serialize, Clone)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub a: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub b: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long, default_value = "sweep")]
    pub out_dir: PathBuf,
    /// Worker threads; each solve runs on one worker.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("SYL_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::SolveAnnulus(a) => commands::solve_annulus(a),
        Command::VerifySigma(a) => commands::verify_sigma(a),
        Command::Expansion(a) => commands::expansion(a),
        Command::FitExponent(a) => commands::fit_exponent(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
