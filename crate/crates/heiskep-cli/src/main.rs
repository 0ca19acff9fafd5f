//! `heiskep` — simulate the nonholonomic Kepler problem on the Heisenberg
//! group, sample its invariant surfaces, tabulate special solutions and run
//! the verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 premature termination (singularity approach or divergence).

mod commands;
mod config;
mod output;
mod recipes;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "heiskep",
    version,
    about = "Nonholonomic Kepler dynamics on the Heisenberg group",
    propagate_version = true
)]
struct Cli {
    /// JSON configuration file; command-line flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for every random choice made by the run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory; write CSV, drift report and plot script.
    Simulate(SimulateArgs),
    /// Sample an invariant surface; write mesh CSV and conic report.
    Surface(SurfaceArgs),
    /// Run the invariant verification suites.
    Verify(VerifyArgs),
    /// Tabulate closed-form special solutions.
    Special(SpecialArgs),
    /// Run a grid of simulations concurrently and summarize.
    Sweep(SweepArgs),
    /// Execute a named reproduction recipe (or all of them).
    Recipe(RecipeArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Coupling constant.
    #[arg(long)]
    pub k: Option<f64>,
    /// Cartesian initial state: x,y,z,pX,pY.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "X,Y,Z,PX,PY")]
    pub cart: Option<Vec<f64>>,
    /// Cylindrical initial state: r,theta,z,pR,pS.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "R,THETA,Z,PR,PS")]
    pub cyl: Option<Vec<f64>>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub sample_interval: Option<f64>,
    /// Enable the optional post-step projection onto integral level sets.
    #[arg(long)]
    pub project: bool,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long)]
    pub k: Option<f64>,
    /// Energy level H of the surface (with --f3/--theta0).
    #[arg(long, allow_hyphen_values = true)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub f3: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
    /// Derive the surface from an initial state instead (--cart/--cyl).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "X,Y,Z,PX,PY")]
    pub cart: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "R,THETA,Z,PR,PS")]
    pub cyl: Option<Vec<f64>>,
    #[arg(long, default_value_t = 120)]
    pub n_r: usize,
    #[arg(long, default_value_t = 64)]
    pub n_theta: usize,
    /// Radial clip for unbounded (H >= 0) surfaces.
    #[arg(long)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub k: Option<f64>,
    /// Run only the named suites (repeatable); default is all of them.
    #[arg(long = "suite")]
    pub suites: Vec<String>,
    /// Negative control: flip the sign of the potential term inside F1.
    #[arg(long, hide = true)]
    pub corrupt_f1: bool,
}

#[derive(Debug, Args)]
pub struct SpecialArgs {
    #[command(subcommand)]
    pub what: SpecialCommand,
}

#[derive(Debug, Subcommand)]
pub enum SpecialCommand {
    /// The stationary points on the vertical axis for a given energy.
    Stationary {
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        energy: f64,
    },
    /// The ascending minimal-energy connection, sampled in z.
    Heteroclinic {
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        z0: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Sample |z| <= z_frac * z0.
        #[arg(long, default_value_t = 0.99)]
        z_frac: f64,
    },
    /// A degenerate radial line and its time law.
    Radial {
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        energy: f64,
        #[arg(long, default_value_t = 0.5)]
        r0: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "X,Y,Z,PX,PY")]
    pub cart: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_name = "R,THETA,Z,PR,PS")]
    pub cyl: Option<Vec<f64>>,
    /// Grid axis `field=v1,v2,...` over k or an initial-state field
    /// (repeatable; the grid is the product of all axes).
    #[arg(long = "axis")]
    pub axes: Vec<String>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub sample_interval: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RecipeArgs {
    /// Recipe name, e.g. fig2-trajectory.
    pub name: Option<String>,
    /// Run every recipe in the directory's registry.
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value = "recipes")]
    pub recipes_dir: PathBuf,
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or environment (exit 2).
    Config(String),
    /// A verification suite or recipe check failed (exit 1).
    Verification(String),
    /// The run terminated prematurely (exit 3).
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Verification(m) => write!(f, "verification failure: {m}"),
            CliError::Runtime(m) => write!(f, "runtime failure: {m}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

impl From<heiskep::Error> for CliError {
    fn from(e: heiskep::Error) -> Self {
        match e {
            heiskep::Error::Diverged { .. } => CliError::Runtime(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult = Result<u8, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HK_LOG", "off"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let common = config::CommonArgs {
        config: cli.config,
        seed: cli.seed,
        out: cli.out,
    };
    let outcome = match cli.command {
        Command::Simulate(args) => commands::simulate::run(&common, &args),
        Command::Surface(args) => commands::surface::run(&common, &args),
        Command::Verify(args) => commands::verify::run(&common, &args),
        Command::Special(args) => commands::special::run(&common, &args),
        Command::Sweep(args) => commands::sweep::run(&common, &args),
        Command::Recipe(args) => recipes::run(&common, &args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
