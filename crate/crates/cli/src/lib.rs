//! Command-line front end: `wentzell mesh|solve|evolve|verify`.
//!
//! Exit codes: 0 success, 1 verification finding, 2 usage or config error,
//! 3 numerical failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod heatmap;
pub mod setup;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::Outcome;
use config::Config;
use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "wentzell", version, about = "P1 finite elements for the Laplacian with Wentzell boundary conditions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or load a mesh and write it with a quality report
    Mesh(Common),
    /// Solve the Robin problem, optionally with a convergence table
    Solve(Common),
    /// Evolve an initial state with the semigroup
    Evolve(Common),
    /// Run verification suites
    Verify(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat `key = value` config file
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one config key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for random data
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Mesh(c) => ("mesh", c),
            Command::Solve(c) => ("solve", c),
            Command::Evolve(c) => ("evolve", c),
            Command::Verify(c) => ("verify", c),
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let (name, common) = cli.command.parts();
    let cfg = Config::resolve(common.config.as_deref(), &common.set, common.out.as_deref(), common.seed)?;
    match name {
        "mesh" => commands::mesh::run(&cfg),
        "solve" => commands::solve::run(&cfg),
        "evolve" => commands::evolve::run(&cfg),
        _ => commands::verify::run(&cfg),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
