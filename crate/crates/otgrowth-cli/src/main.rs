//! `otgrowth` — scenario-driven verification harness for optimal-transport
//! growth bounds.
//!
//! Each subcommand reads one JSON scenario, verifies its declared
//! hypotheses, runs the pipeline, and writes a CSV table plus a JSON
//! summary. Exit codes: 0 all checks passed, 2 invariant violation,
//! 3 hypothesis gate failure, 4 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use otgrowth_cli::run::{
    run_ballprob_check, run_bound_curve, run_concentration_check, run_verify_1d,
    run_verify_nd, Outcome, RunOptions,
};
use otgrowth_cli::scenario::{load_scenario, FlavorSel};
use otgrowth_cli::{CliError, EXIT_OK, EXIT_VIOLATION};

#[derive(Parser)]
#[command(
    name = "otgrowth",
    version,
    about = "Verify growth bounds on optimal-transport maps against reference maps, \
             sampled invariants, and ball-probability estimates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact 1D quantile transport map vs the growth bound, pointwise.
    #[command(name = "verify-1d")]
    Verify1d(RunArgs),
    /// Discrete LP / Sinkhorn maps vs monotonicity, cone inclusion, and
    /// statistical bound diagnostics.
    #[command(name = "verify-nd")]
    VerifyNd(RunArgs),
    /// Tabulate bound curves over a log-spaced |x| grid with fits.
    #[command(name = "bound-curve")]
    BoundCurve(RunArgs),
    /// Declared concentration profiles / tail functions vs samples.
    #[command(name = "concentration-check")]
    ConcentrationCheck(RunArgs),
    /// Analytic ball-probability lower bounds vs MC and quadrature.
    #[command(name = "ballprob-check")]
    BallprobCheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Replace the scenario's seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for output files (default: the scenario file's directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the scenario's bound-flavor selection.
    #[arg(long, value_enum)]
    flavor: Option<FlavorSel>,
}

fn dispatch(command: &Command) -> Result<Outcome, CliError> {
    let (args, runner): (&RunArgs, fn(_, _) -> _) = match command {
        Command::Verify1d(a) => (a, run_verify_1d as fn(&_, &_) -> _),
        Command::VerifyNd(a) => (a, run_verify_nd),
        Command::BoundCurve(a) => (a, run_bound_curve),
        Command::ConcentrationCheck(a) => (a, run_concentration_check),
        Command::BallprobCheck(a) => (a, run_ballprob_check),
    };
    let scenario = load_scenario(&args.scenario)?;
    let out_dir = match &args.out_dir {
        Some(dir) => dir.clone(),
        None => args
            .scenario
            .parent()
            .map(PathBuf::from)
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    let opts =
        RunOptions { out_dir, seed_override: args.seed, flavor_override: args.flavor };
    runner(&scenario, &opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            println!("csv:  {}", outcome.csv_path.display());
            println!("json: {}", outcome.json_path.display());
            if outcome.violations == 0 {
                ExitCode::from(EXIT_OK as u8)
            } else {
                eprintln!("{} invariant violation(s) recorded", outcome.violations);
                ExitCode::from(EXIT_VIOLATION as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
