// SPDX-License-Identifier: Apache-2.0

//! `teksim`: run and compare thread-scheduling scenarios.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 internal
//! invariant violation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tek_cli::{
    compare_run, compare_summary, list_scenarios, load_scenario, load_table, resolve_scenario,
    run_one, run_summary, seed_from_env, table_csv, CliError, ScenarioSource, SEED_ENV,
};
use tek_core::scenario::ModeSpec;

#[derive(Parser)]
#[command(
    name = "teksim",
    about = "Deterministic thread-scheduling and stack-tuning simulator",
    after_help = format!(
        "Scenarios may be file paths or embedded names (see list-scenarios).\n\
         The {SEED_ENV} environment variable overrides the scenario seed."
    ),
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write metric CSV files.
    Run {
        /// Scenario file path or embedded scenario name.
        scenario: String,
        /// Override the scenario's mode: baseline, tek, or both.
        #[arg(long)]
        mode: Option<String>,
        /// Output directory (default: teksim-out/<scenario-name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the per-tick schedule trace (large).
        #[arg(long)]
        trace: bool,
    },
    /// Run both modes on one scenario and print paired deltas.
    Compare {
        /// Scenario file path or embedded scenario name.
        scenario: String,
        /// Output directory (default: teksim-out/<scenario-name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-tick schedule traces (large).
        #[arg(long)]
        trace: bool,
    },
    /// Print a stored thread table (`table.tit` or a run directory) as CSV.
    DumpTable {
        /// A `.tit` file or a run output directory.
        run: PathBuf,
    },
    /// List the scenarios embedded in this binary.
    ListScenarios,
}

fn parse_mode_arg(value: &str) -> Result<ModeSpec, CliError> {
    ModeSpec::parse(value)
        .ok_or_else(|| CliError(format!("unknown mode \"{value}\" (baseline, tek, or both)")))
}

fn out_dir(explicit: Option<PathBuf>, scenario_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| PathBuf::from("teksim-out").join(scenario_name))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, mode, out, trace } => {
            let (text, source) = resolve_scenario(&scenario)?;
            let config = load_scenario(&text, seed_from_env()?)?;
            let mode_spec = match mode {
                Some(value) => parse_mode_arg(&value)?,
                None => config.mode,
            };
            let dir = out_dir(out, &config.name);
            let modes = mode_spec.modes();
            for mode in &modes {
                let mode_dir =
                    if modes.len() == 1 { dir.clone() } else { dir.join(mode.as_str()) };
                let report = run_one(&config, *mode, trace, &mode_dir)?;
                print!("{}", run_summary(&report));
            }
            println!("outputs: {}", dir.display());
            if let ScenarioSource::Embedded(name) = source {
                eprintln!("note: used embedded scenario \"{name}\"");
            }
            Ok(())
        }
        Command::Compare { scenario, out, trace } => {
            let (text, _) = resolve_scenario(&scenario)?;
            let config = load_scenario(&text, seed_from_env()?)?;
            let dir = out_dir(out, &config.name);
            let (baseline, tek) = compare_run(&config, trace, &dir)?;
            print!("{}", compare_summary(&baseline, &tek));
            println!("outputs: {}", dir.display());
            Ok(())
        }
        Command::DumpTable { run } => {
            let records = load_table(&run)?;
            print!("{}", table_csv(&records));
            Ok(())
        }
        Command::ListScenarios => {
            print!("{}", list_scenarios());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors; usage problems exit 1.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("teksim: {e}");
            ExitCode::from(1)
        }
        Err(_) => {
            eprintln!("teksim: internal invariant violation");
            ExitCode::from(2)
        }
    }
}
