//! `smithcal`: run comass estimates, Smith residual checks, energy and
//! tension computations, and the randomized invariant suites.
//!
//! Exit codes: 0 when every verdict passes, 1 on a verification failure,
//! 2 on bad input or configuration.

mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use config::{Command, Flags, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "smithcal", version, about = "Numerical checks for Smith immersions and submersions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

/// Input or configuration problem; always exit code 2.
#[derive(Debug)]
pub struct CliError(String);

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError(msg.into())
    }
}

impl From<smithcal::Error> for CliError {
    fn from(e: smithcal::Error) -> Self {
        CliError(e.to_string())
    }
}

/// Report layout shared by all subcommands.
#[derive(Serialize)]
pub struct Report<P: Serialize, S: Serialize> {
    pub version: &'static str,
    pub config_echo: RunConfig,
    pub points: Vec<P>,
    pub summary: S,
}

/// A finished command: the serialized report and whether it passed.
pub struct Outcome {
    pub json: String,
    pub passed: bool,
}

impl Outcome {
    pub fn new<P: Serialize, S: Serialize>(cfg: &RunConfig, points: Vec<P>, summary: S, passed: bool) -> Self {
        let report = Report { version: env!("CARGO_PKG_VERSION"), config_echo: cfg.clone(), points, summary };
        Outcome { json: serde_json::to_string_pretty(&report).expect("report serializes"), passed }
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let cfg = RunConfig::resolve(cli.command, cli.flags)?;
    let outcome = match cli.command {
        Command::Comass => commands::comass(&cfg)?,
        Command::Check => commands::check(&cfg)?,
        Command::Energy => commands::energy(&cfg)?,
        Command::Tension => commands::tension(&cfg)?,
        Command::VerifyLemmas => commands::verify_lemmas(&cfg)?,
        Command::ModelsList => commands::models_list(&cfg)?,
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, format!("{}\n", outcome.json))
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{}", outcome.json),
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(o) if o.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
