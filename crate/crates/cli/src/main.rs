//! `wetlab`: runs solve, sweep, hysteresis, formula and validate scenarios
//! from a TOML configuration and writes CSV tables plus `manifest.csv`.

mod config;
mod manifest;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};

use config::{RunConfig, Scenario};
use manifest::Outputs;
use scenarios::Outcome;

const DEFAULT_OUTPUT_DIR: &str = "wetlab-out";

const EXIT_CONFIG: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "wetlab", version, about = "Apparent contact angles on periodic rough surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free-boundary solve at one roughness scale.
    Solve(RunArgs),
    /// Convergence study over `sweep.eps`.
    Sweep(RunArgs),
    /// Angle against level-line offset, plus the optional pillar formula.
    Hysteresis(RunArgs),
    /// Apparent angle of one level contact line.
    Formula(RunArgs),
    /// Invariant suite; exits 3 when a check fails.
    Validate(RunArgs),
    /// Runs the scenario named by the config's `scenario` key.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML configuration; defaults apply when omitted.
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set surface.eps=0.125`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, short, env = "WETLAB_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
}

enum Failure {
    Config(anyhow::Error),
    Solver(anyhow::Error),
}

fn load(args: &RunArgs, forced: Option<Scenario>) -> Result<(RunConfig, Scenario)> {
    let mut overrides = args.set.clone();
    if let Some(s) = forced {
        overrides.push(format!("scenario=\"{}\"", s.name()));
    }
    let cfg = RunConfig::load(args.config.as_deref(), &overrides)?;
    let scenario = cfg.scenario.ok_or_else(|| anyhow!("scenario: missing; set it in the config or use a subcommand"))?;
    Ok((cfg, scenario))
}

fn execute(args: &RunArgs, forced: Option<Scenario>) -> std::result::Result<Outcome, Failure> {
    let (cfg, scenario) = load(args, forced).map_err(Failure::Config)?;
    let dir = args
        .output_dir
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let mut out = Outputs::create(&dir).map_err(Failure::Config)?;
    out.write("config.toml", cfg.canonical().as_bytes()).map_err(Failure::Config)?;
    log::info!("scenario {} into {}", scenario.name(), out.dir().display());
    let result = scenarios::run(&cfg, scenario, &mut out);
    let status = match &result {
        Ok(Outcome::Success) => "ok".to_string(),
        Ok(Outcome::NotConverged(why)) => format!("not converged: {why}"),
        Ok(Outcome::ValidationFailed) => "validation failed".to_string(),
        Err(e) => format!("failed: {e}"),
    };
    out.metric("outcome", status);
    let manifest = out.finish(&cfg.hash(), scenario.name()).map_err(Failure::Solver)?;
    log::info!("manifest {}", manifest.display());
    result.map_err(Failure::Solver)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (args, forced) = match &cli.command {
        Command::Solve(a) => (a, Some(Scenario::Solve)),
        Command::Sweep(a) => (a, Some(Scenario::Sweep)),
        Command::Hysteresis(a) => (a, Some(Scenario::Hysteresis)),
        Command::Formula(a) => (a, Some(Scenario::Formula)),
        Command::Validate(a) => (a, Some(Scenario::Validate)),
        Command::Run(a) => (a, None),
    };
    match execute(args, forced) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged(why)) => {
            eprintln!("wetlab: not converged: {why}");
            ExitCode::from(EXIT_SOLVER)
        }
        Ok(Outcome::ValidationFailed) => {
            eprintln!("wetlab: validation failed; see validate.csv");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Config(e)) => {
            eprintln!("wetlab: config error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("wetlab: {e:#}");
            ExitCode::from(EXIT_SOLVER)
        }
    }
}
