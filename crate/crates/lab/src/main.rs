//! csmlab: a pseudo-spectral 2D incompressible-flow laboratory comparing
//! Navier-Stokes against the corrected Smagorinsky model.
//!
//! Exit codes: 0 success/pass, 2 validation error, 3 numerical abort,
//! 4 verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use csmlab::commands::{self, SweepArgs, VerifyArgs};
use csmlab::selftest;
use csmlab_core::flow::Model;

#[derive(Parser)]
#[command(
    name = "csmlab",
    version,
    about = "Pseudo-spectral lab for 2D incompressible flow: DNS vs the corrected Smagorinsky model",
    after_help = "Outputs default to a timestamped directory under $CSMLAB_OUT_DIR (or ./csmlab-out)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Direct simulation of the Navier-Stokes equations
    RunDns {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: timestamped)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the seed of seeded initial conditions
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the corrected Smagorinsky model
    RunCsm {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run an NSE/CSM pair in lockstep and record the error field
    RunPair {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the perturbation seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check one of the monitored inequalities (1: regularity envelope,
    /// 2: error bound, 3: asymptotic convergence)
    Verify {
        /// Which bound to check: 1, 2, or 3
        theorem: u8,
        /// Produce the series by running this config (single for 1, pair for 2/3)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Use an existing series CSV instead of running
        #[arg(long)]
        series: Option<PathBuf>,
        /// Viscosity, required with --series for theorems 2 and 3
        #[arg(long)]
        nu: Option<f64>,
        /// Decay requirement on ||phi(T)|| / max ||phi|| (theorem 3, unforced)
        #[arg(long, default_value_t = csmlab_core::monitors::DECAY_THRESHOLD)]
        decay_threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a run or pair across a list of parameter values
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// KEY=v1,v2,... — dotted key path into the config document. For pair
        /// configs a bare path applies to both u and w.
        #[arg(long)]
        vary: String,
        /// Restrict the fitted constants to one theorem
        #[arg(long)]
        theorem: Option<u8>,
        /// Worker count (default: logical cores)
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render series columns as a standalone SVG line chart
    Plot {
        /// One or more series CSV files
        #[arg(long, num_args = 1.., required = true)]
        series: Vec<PathBuf>,
        /// Output SVG path
        #[arg(long)]
        out: PathBuf,
        /// x:y1,y2,... column selection, e.g. t:l2_sq
        #[arg(long)]
        columns: String,
        /// Logarithmic y axis
        #[arg(long)]
        log_y: bool,
        /// Chart title
        #[arg(long, default_value = "")]
        title: String,
    },
    /// Run the built-in oracle suite end to end
    Selftest {
        /// Scratch directory (default: a temp dir)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> csmlab::Result<()> {
    match cli.command {
        Command::RunDns { config, out, seed } => commands::cmd_run(Model::Nse, &config, out, seed),
        Command::RunCsm { config, out, seed } => commands::cmd_run(Model::Csm, &config, out, seed),
        Command::RunPair { config, out, seed } => commands::cmd_run_pair(&config, out, seed),
        Command::Verify { theorem, config, series, nu, decay_threshold, out } => {
            commands::cmd_verify(VerifyArgs { theorem, config, series, nu, decay_threshold, out })
        }
        Command::Sweep { config, vary, theorem, jobs, out } => {
            commands::cmd_sweep(SweepArgs { config, vary, out, theorem, jobs })
        }
        Command::Plot { series, out, columns, log_y, title } => {
            commands::cmd_plot(&series, &out, &columns, log_y, &title)
        }
        Command::Selftest { out } => selftest::cmd_selftest(out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("csmlab: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
