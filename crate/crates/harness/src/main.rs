//! Command-line front end. Exit status is 0 iff no violation was found.
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lattice_bpb_harness::config::{self, Command, Mode};
use lattice_bpb_harness::verify::verify_file;
use lattice_bpb_harness::{run_suite, RunOptions};

#[derive(Parser)]
#[command(version, about = "Positive-operator norm-attainment experiments", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file (TOML or JSON)
    config: PathBuf,
    /// Override the seed of every experiment
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scalar mode: float or rational
    #[arg(long)]
    mode: Option<Mode>,
    /// Report directory
    #[arg(long, default_value = "reports")]
    out: PathBuf,
    /// Fill the micros column (makes reports differ between runs)
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate and validate moduli of uniform monotonicity
    Modulus(RunArgs),
    /// Correct operators on the sup-norm domain
    BpbLinfty(RunArgs),
    /// Correct operators on finitely supported sequences
    BpbC0(RunArgs),
    /// Run the lower-bound experiment on adversarial operators
    Converse(RunArgs),
    /// Run each experiment under the command it names
    Run(RunArgs),
    /// Re-check the certificates in a JSON report
    Verify { certificate: PathBuf },
}

fn run(args: &RunArgs, command: Option<Command>) -> anyhow::Result<usize> {
    let experiments = config::load(&args.config)?;
    let opts = RunOptions {
        seed: args.seed,
        mode: args.mode,
        timing: args.timing,
        ..RunOptions::default()
    };
    let entries = run_suite(&experiments, command, &opts, Some(&args.out))?;
    let mut violations = 0;
    for e in &entries {
        println!(
            "{} [{}]: {} rows, {} violations -> {}",
            e.label,
            e.command.name(),
            e.report.rows(),
            e.report.violations(),
            e.files
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
        violations += e.report.violations();
    }
    if entries.is_empty() {
        println!("no experiments");
    }
    Ok(violations)
}

fn verify(path: &Path) -> anyhow::Result<usize> {
    let results = verify_file(path)?;
    let mut bad = 0;
    for (id, ledger) in &results {
        if ledger.all_hold() {
            println!("instance {id}: ok ({} checks)", ledger.checks.len());
        } else {
            bad += 1;
            println!("instance {id}: FAILED");
            for c in ledger.failures() {
                println!("  {c}");
            }
        }
    }
    println!("{} certificates, {bad} failed", results.len());
    Ok(bad)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Modulus(a) => run(a, Some(Command::Modulus)),
        Cmd::BpbLinfty(a) => run(a, Some(Command::BpbLinfty)),
        Cmd::BpbC0(a) => run(a, Some(Command::BpbC0)),
        Cmd::Converse(a) => run(a, Some(Command::Converse)),
        Cmd::Run(a) => run(a, None),
        Cmd::Verify { certificate } => verify(certificate),
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
