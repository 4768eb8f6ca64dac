use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pmsm_imbalance_cli::{parse_scenario, run_scenario, CliError, Job};

/// Imbalanced PMSM models driven by TOML scenario files.
#[derive(Parser)]
#[command(name = "pmsm-imbalance", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nominal values, deviations and 2θ coefficients of every family.
    Coeffs(JobArgs),
    /// Time-domain simulation written to simulate.csv.
    Simulate(JobArgs),
    /// Closed-form dq voltages against a current-fed simulation.
    Compare(JobArgs),
    /// Recover one family's per-phase deviations from dq voltages.
    Identify(JobArgs),
}

#[derive(Args)]
struct JobArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn run(job: Job, args: &JobArgs) -> Result<(), CliError> {
    let scenario = parse_scenario(&args.scenario)?;
    let output = run_scenario(job, &scenario, &args.out)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", output.summary_text());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (job, args) = match &cli.command {
        Command::Coeffs(a) => (Job::Coeffs, a),
        Command::Simulate(a) => (Job::Simulate, a),
        Command::Compare(a) => (Job::Compare, a),
        Command::Identify(a) => (Job::Identify, a),
    };
    match run(job, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
