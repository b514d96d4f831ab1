//! Batch front end: load a scenario file, run it, leave artifacts on
//! disk. Exit codes: 0 success, 2 configuration error, 3 numerical
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pmo_neuron::config::{ScenarioKind, ScenarioSpec};
use pmo_neuron::runner::{self, RunError};

#[derive(Parser)]
#[command(name = "pmo-neuron", version, about = "Electrothermal RRAM neuron simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario TOML file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also render SVG plots of the traces.
    #[arg(long)]
    plot: bool,
    /// Trace sampling interval in seconds (overrides the config).
    #[arg(long)]
    sample_interval: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by --config.
    Simulate(CommonArgs),
    /// Run one simulation per [sweep] input level and aggregate a CSV.
    Sweep(CommonArgs),
    /// Fit free device parameters to the observations named in --config.
    Calibrate(CommonArgs),
    /// Emit the timescale/area scaling report.
    Scaling(CommonArgs),
    /// Run the built-in chattering and bursting pattern scenarios.
    Patterns(CommonArgs),
}

fn require_config(args: &CommonArgs) -> Result<(ScenarioSpec, PathBuf), RunError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| RunError::Config("--config is required for this subcommand".into()))?;
    runner::load_spec(path)
}

fn print_summary(summary: &impl serde::Serialize) {
    match serde_json::to_string_pretty(summary) {
        Ok(s) => println!("{s}"),
        Err(e) => eprintln!("summary serialization failed: {e}"),
    }
}

fn execute(cmd: &Command) -> Result<(), RunError> {
    match cmd {
        Command::Simulate(args) => {
            let (spec, base) = require_config(args)?;
            let summary = runner::run(&spec, &base, &args.out, args.plot, args.sample_interval)?;
            print_summary(&summary);
            Ok(())
        }
        Command::Sweep(args) => {
            let (spec, _) = require_config(args)?;
            let rows = runner::sweep(&spec, &args.out, args.plot)?;
            print_summary(&rows);
            Ok(())
        }
        Command::Calibrate(args) => {
            let (spec, base) = require_config(args)?;
            if spec.scenario.kind != ScenarioKind::Calibrate {
                return Err(RunError::Config(
                    "the calibrate subcommand needs a scenario of kind \"calibrate\"".into(),
                ));
            }
            let summary = runner::run(&spec, &base, &args.out, args.plot, args.sample_interval)?;
            print_summary(&summary);
            Ok(())
        }
        Command::Scaling(args) => {
            let (spec, base) = match &args.config {
                Some(_) => require_config(args)?,
                None => (
                    ScenarioSpec::parse("[scenario]\nkind = \"scaling-report\"\n")
                        .map_err(RunError::Config)?,
                    PathBuf::from("."),
                ),
            };
            if spec.scenario.kind != ScenarioKind::ScalingReport {
                return Err(RunError::Config(
                    "the scaling subcommand needs a scenario of kind \"scaling-report\"".into(),
                ));
            }
            let summary = runner::run(&spec, &base, &args.out, args.plot, args.sample_interval)?;
            print_summary(&summary);
            Ok(())
        }
        Command::Patterns(args) => {
            // Built-in scenario pair; --config may override t_end etc.
            let mut summaries = Vec::new();
            for (name, kind) in [("ch", "pattern-ch"), ("ib", "pattern-ib")] {
                let (spec, base) = match &args.config {
                    Some(path) => {
                        let (mut spec, base) = runner::load_spec(path)?;
                        if spec.scenario.kind != ScenarioKind::PatternCh
                            && spec.scenario.kind != ScenarioKind::PatternIb
                        {
                            return Err(RunError::Config(
                                "the patterns subcommand needs a pattern-ch or pattern-ib scenario"
                                    .into(),
                            ));
                        }
                        spec.scenario.kind = if name == "ch" {
                            ScenarioKind::PatternCh
                        } else {
                            ScenarioKind::PatternIb
                        };
                        (spec, base)
                    }
                    None => (
                        ScenarioSpec::parse(&format!(
                            "[scenario]\nkind = \"{kind}\"\nt_end_s = 15e-6\n"
                        ))
                        .map_err(RunError::Config)?,
                        PathBuf::from("."),
                    ),
                };
                let out = args.out.join(name);
                let summary =
                    runner::run(&spec, &base, &out, args.plot, args.sample_interval)?;
                summaries.push(summary);
            }
            print_summary(&summaries);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
