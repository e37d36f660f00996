//! `colored-ldp`: sample colored random graphs, evaluate rate functions and
//! run the validation battery from a JSON config.
//!
//! Exit codes: 0 success, 2 config or validation failure, 3 infeasible
//! model, 4 solver non-convergence, 1 output I/O failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "colored-ldp", version, about = "Large deviations of colored sparse random graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Validation suite to run; repeatable. Defaults to all.
    #[arg(long, global = true)]
    suite: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Sample a graph from the model; write its edge list and empirical measures.
    Generate,
    /// Compute the empirical measures of a graph file.
    Measure,
    /// Evaluate J, I, I_omega, J_tilde or zeta.
    Rate,
    /// Evaluate the Erdős–Rényi degree rate on degree laws.
    DegreeRate,
    /// Edge-count tail: rate, exact exponents and Monte Carlo estimates.
    EdgeRate,
    /// Annealed Ising free energy over a (beta, c) grid.
    Ising,
    /// Sample uniformly given color and pair counts.
    SampleConditional,
    /// Consistify, quantize and cap a neighborhood measure.
    Approximate,
    /// Run the validation battery.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Measure => "measure",
            Command::Rate => "rate",
            Command::DegreeRate => "degree-rate",
            Command::EdgeRate => "edge-rate",
            Command::Ising => "ising",
            Command::SampleConditional => "sample-conditional",
            Command::Approximate => "approximate",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Infeasible(String),
    Io(String),
}

impl From<colored_ldp::Error> for CliError {
    fn from(e: colored_ldp::Error) -> Self {
        use colored_ldp::Error as E;
        match e {
            E::Construction(_) | E::Resource(_) => CliError::Infeasible(e.to_string()),
            E::Shape(_) | E::Domain(_) | E::Parse(_) => CliError::Config(e.to_string()),
        }
    }
}

/// How a command that produced its outputs ended.
#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    NotConverged(String),
    ValidationFailed(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let run =
        commands::Run { command: cli.command, config: cli.config, seed: cli.seed, out: cli.out, suites: cli.suite };
    match commands::run(&run) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NotConverged(msg)) => {
            eprintln!("solver did not converge: {msg}");
            ExitCode::from(4)
        }
        Ok(Status::ValidationFailed(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(1)
        }
    }
}
