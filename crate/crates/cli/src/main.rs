use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stressgrade_cli::commands::{self, CommandError};
use stressgrade_cli::config::{ConfigError, RunConfig};

/// Predict exam grade bands from wearable stress signals.
#[derive(Parser)]
#[command(name = "stressgrade", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the dataset layout, sensor files and roster
    Validate(Common),
    /// Write the per-session feature table
    Features(Common),
    /// Cross-validate every enabled classifier and write reports
    Evaluate(Common),
    /// Generate a synthetic cohort
    Synth(Common),
}

#[derive(Args)]
struct Common {
    /// Config file (key = value lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overrides `output_dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra settings as key=value
    overrides: Vec<String>,
}

fn build_config(args: &Common) -> Result<RunConfig, ConfigError> {
    let mut config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for o in &args.overrides {
        config.apply_override(o)?;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CommandError> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Validate(args) => commands::cmd_validate(&build_config(&args)?, &mut stdout).map(drop),
        Command::Features(args) => commands::cmd_features(&build_config(&args)?, &mut stdout),
        Command::Evaluate(args) => commands::cmd_evaluate(&build_config(&args)?, &mut stdout).map(drop),
        Command::Synth(args) => {
            let config = build_config(&args)?;
            let out = args.out.clone().unwrap_or_else(|| config.output_dir.clone());
            commands::cmd_synth(&config, &out, &mut stdout)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut stderr = io::stderr().lock();
            if let CommandError::Invalid(defects) = &e {
                commands::print_defects(&mut stderr, defects);
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
