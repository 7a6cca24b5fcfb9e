use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{Format, RunArgs};

#[derive(Debug, Parser)]
#[command(name = "exchange-lab", version, about = "Exchange-sign experiments on a fermionic mode register")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a named experiment and print its result.
    Run(RunArgs),
    /// Cross-check the fast kernel against the dense oracle and run the invariant suite.
    Verify {
        #[arg(long, default_value_t = 8)]
        modes: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the report as JSON or CSV instead of a text summary.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Print the per-hop sign ledger of both branches.
    Attribute(RunArgs),
    /// Optical and gravitational reference phases from a JSON request.
    Reference {
        /// Request file; reads stdin when absent.
        input: Option<PathBuf>,
        /// Evaluate the built-in half-wave plate and neutron example.
        #[arg(long, conflicts_with = "input")]
        demo: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    BadInput(String),
    VerifyFailed,
    InvalidResult,
}

impl From<exchange_lab::Error> for CliError {
    fn from(e: exchange_lab::Error) -> Self {
        CliError::BadInput(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed => 1,
            CliError::BadInput(_) => 2,
            CliError::InvalidResult => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => args.validate().and_then(|cfg| commands::run(&cfg)),
        Command::Verify { modes, trials, seed, format } => commands::verify(modes, trials, seed, format),
        Command::Attribute(args) => args.validate().and_then(|cfg| commands::attribute(&cfg)),
        Command::Reference { input, demo } => commands::reference(input.as_deref(), demo),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::BadInput(msg) => eprintln!("error: {msg}"),
                CliError::VerifyFailed => eprintln!("verification failed"),
                CliError::InvalidResult => eprintln!("experiment result is invalid: a branch was annihilated"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
