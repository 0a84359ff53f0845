//! `arrival-lab` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use arrival_lab::validate::validate_text;
use arrival_lab::{run_scenario, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arrival-lab", version, about = "Runs arrival-time and detector scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its outputs and manifest.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed_override: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Validate before running and stop on any violation.
        #[arg(long)]
        validate: bool,
    },
    /// Check a scenario without running it and print a JSON report.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { scenario, out_dir, seed_override, threads, validate } => {
            let opts = RunOptions { seed_override, threads, validate_first: validate };
            match run_scenario(&scenario, &out_dir, opts) {
                Ok(m) => {
                    eprintln!("{}: wrote {} outputs to {}", m.command, m.outputs.len(), out_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
        Command::Validate { scenario } => match std::fs::read_to_string(&scenario) {
            Ok(text) => {
                let report = validate_text(&text);
                println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {}: {e}", scenario.display());
                ExitCode::from(1)
            }
        },
    }
}
