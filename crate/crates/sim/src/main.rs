//! pcimkit: run proof-carrying-message scenarios and adversary suites.
//!
//! Exit codes: 0 pass, 1 expectation mismatch, 2 invariant violation
//! missed, 3 invalid input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pcimkit_sim::{
    effective_seed, run_adversary_suite, run_scenario, AdversaryKind, AllocationMatrix,
    RunOutcome, Scenario,
};

#[derive(Parser)]
#[command(name = "pcimkit", version, about = "deterministic simulator for proof-carrying interchain messages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and print its allocation report.
    Run {
        scenario: PathBuf,
        /// Override the scenario's seed (also: PCIMKIT_SEED env var).
        #[arg(long)]
        seed: Option<u64>,
        /// Write the acceptance log to this path.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        report: ReportFormat,
    },
    /// Run every *.scn scenario in a directory and aggregate.
    Suite {
        directory: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        report: ReportFormat,
    },
    /// Run an adversary family against a base scenario.
    Adversary {
        scenario: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long, default_value = "100")]
        trials: u32,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load_scenario(path: &Path) -> Result<Scenario, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    Scenario::parse(&name, &text).map_err(|e| format!("{}: {e}", path.display()))
}

fn print_outcome(outcome: &RunOutcome, format: ReportFormat) {
    println!(
        "scenario {} seed {} -> {} attempts, exit {}",
        outcome.name,
        outcome.seed,
        outcome.log.lines().count(),
        outcome.exit().code()
    );
    for mismatch in &outcome.mismatches {
        println!("  mismatch: {mismatch}");
    }
    for gap in &outcome.coverage_gaps {
        println!("  unexercised invariant for quadrant: {gap}");
    }
    match format {
        ReportFormat::Text => print!("{}", outcome.matrix.render_text()),
        ReportFormat::Structured => print!("{}", outcome.matrix.render_structured()),
    }
}

fn run() -> Result<u8, String> {
    match Cli::parse().command {
        Command::Run { scenario, seed, log, report } => {
            let parsed = load_scenario(&scenario)?;
            let outcome = run_scenario(&parsed, effective_seed(seed))
                .map_err(|e| e.to_string())?;
            if let Some(path) = log {
                fs::write(&path, &outcome.log)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            print_outcome(&outcome, report);
            Ok(outcome.exit().code() as u8)
        }
        Command::Suite { directory, seed, report } => {
            let mut paths: Vec<PathBuf> = fs::read_dir(&directory)
                .map_err(|e| format!("{}: {e}", directory.display()))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "scn"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(format!("{}: no .scn scenarios", directory.display()));
            }

            let mut combined = AllocationMatrix::new();
            let mut worst = 0u8;
            for path in &paths {
                let parsed = load_scenario(path)?;
                let outcome = run_scenario(&parsed, effective_seed(seed))
                    .map_err(|e| e.to_string())?;
                print_outcome(&outcome, report);
                println!();
                combined.merge(&outcome.matrix);
                worst = worst.max(outcome.exit().code() as u8);
            }
            println!("suite: {} scenarios", paths.len());
            match report {
                ReportFormat::Text => print!("{}", combined.render_text()),
                ReportFormat::Structured => print!("{}", combined.render_structured()),
            }
            Ok(worst)
        }
        Command::Adversary { scenario, kind, trials, seed } => {
            let mut parsed = load_scenario(&scenario)?;
            if let Some(seed) = effective_seed(seed) {
                parsed.seed = seed;
            }
            let kind: AdversaryKind = kind
                .parse()
                .map_err(|_| format!("unknown adversary kind '{kind}'"))?;
            let summary =
                run_adversary_suite(&parsed, kind, trials).map_err(|e| e.to_string())?;
            println!("{}", summary.render());
            Ok(if summary.violations_missed > 0 { 2 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("pcimkit: {message}");
            ExitCode::from(3)
        }
    }
}
