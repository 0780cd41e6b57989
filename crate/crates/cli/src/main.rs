//! `helfrich-lab`: build surfaces, evaluate curvature functionals, check the
//! diameter, isoperimetric and varifold inequalities, run the counterexample
//! sweeps and minimize the constrained Helfrich energy.
//!
//! Exit status is 0 on success, 1 when a checked inequality fails and 2 on
//! bad input.

mod commands;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "helfrich-lab", version, about = "Helfrich energy surfaces, functionals and inequalities")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON surface spec.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Spontaneous curvature c₀.
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c0: f64,
    /// Prescribed area.
    #[arg(long, global = true)]
    pub a0: Option<f64>,
    /// Prescribed enclosed volume.
    #[arg(long, global = true)]
    pub v0: Option<f64>,
    /// Diameter constant used by the corollary and the Γ bound.
    #[arg(long, global = true)]
    pub c_diam: Option<f64>,
    /// Quasi-Monte Carlo samples per replicate.
    #[arg(long, global = true, default_value_t = 200_000)]
    pub samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (all cores when absent).
    #[arg(long, global = true, env = "HELFRICH_LAB_THREADS")]
    pub threads: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub quad_tol: f64,
    /// Azimuthal samples for meshing.
    #[arg(long, global = true)]
    pub n_azimuth: Option<usize>,
    /// Target meridian edge length for meshing.
    #[arg(long, global = true)]
    pub edge: Option<f64>,
    /// Main output (JSON report or CSV table); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// OFF mesh output.
    #[arg(long, global = true)]
    pub mesh_out: Option<PathBuf>,
    /// SVG meridian plot output.
    #[arg(long, global = true)]
    pub svg_out: Option<PathBuf>,
    /// Validate inputs and print the resolved parameters without computing.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a surface and report its construction data.
    Construct,
    /// Evaluate area, volume, total mean curvature, Willmore and Helfrich energies.
    Eval,
    /// Check an inequality.
    #[command(subcommand)]
    Verify(Verify),
    /// Run a parameter sweep and write a CSV table.
    #[command(subcommand)]
    Sweep(Sweep),
    /// Minimize the Helfrich energy of a genus-zero profile at fixed area and volume.
    Minimize(MinimizeArgs),
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Extrinsic diameter against the L¹ curvature deficit (c₀ ≤ 0).
    Diameter,
    /// Isoperimetric theorem and corollary on the enclosed solid (c₀ ≤ 0).
    Iso,
    /// Volume, Willmore and Helfrich bounds and the expansion identity.
    Bounds,
    /// The existence threshold 8π + Γ(c₀, a₀, v₀).
    Gamma,
}

#[derive(Debug, Subcommand)]
pub enum Sweep {
    /// Energy gaps of the bridged surfaces against their limits.
    Lsc {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.2, 0.1, 0.05])]
        b: Vec<f64>,
    },
    /// Total mean curvature of spheres with many small handles.
    Totalmc {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.04, 0.02, 0.01, 0.005])]
        a: Vec<f64>,
    },
    /// Intrinsic and extrinsic diameters of snakes (defaults to the sides n = 2, 3, 4).
    Diam {
        #[arg(long, value_delimiter = ',')]
        a: Vec<f64>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct MinimizeArgs {
    /// Number of profile nodes.
    #[arg(long, default_value_t = 200)]
    pub nodes: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub constraint_tol: f64,
    /// Solve on the requested node count only.
    #[arg(long)]
    pub single_level: bool,
    /// Per-iteration trace as CSV.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Final profile as a JSON surface spec.
    #[arg(long)]
    pub profile_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(commands::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(commands::Outcome::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
