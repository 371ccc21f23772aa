//! `agentnet` command-line front end.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, config or inputs; exit code 1.
    #[error("{0}")]
    Usage(String),
    /// Failure while running; exit code 2.
    #[error("{0}")]
    Runtime(String),
}

#[derive(Debug, Parser)]
#[command(name = "agentnet", version, about = "Simulate and analyze LLM-agent social platforms")]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a simulation and write its event log.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a JSONL event log and write it in canonical form.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Reject unknown fields instead of ignoring them.
        #[arg(long)]
        strict: bool,
    },
    /// Run one analysis over an event log.
    #[command(subcommand)]
    Analyze(Analysis),
    /// Run an experiment over an event log.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Incremental feature prediction of agent scores.
    Predict {
        #[command(flatten)]
        io: OptionalLogIo,
        #[arg(long)]
        seed: u64,
        /// Use the planted synthetic generator instead of a log.
        #[arg(long, conflicts_with = "log")]
        synthetic: bool,
    },
    /// Collect every report under `--out` into a summary.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct LogIo {
    /// JSONL event log.
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// TOML run configuration; defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OptionalLogIo {
    #[arg(long, required_unless_present = "synthetic")]
    log: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Analysis {
    /// Community and follow-time homophily.
    Homophily {
        #[command(flatten)]
        io: LogIo,
        #[arg(long)]
        seed: u64,
    },
    /// Neighbor convergence and backstory drift.
    Influence {
        #[command(flatten)]
        io: LogIo,
    },
    /// Toxicity scoring, concentration, engagement and network comparison.
    Toxicity {
        #[command(flatten)]
        io: LogIo,
    },
    /// Political ideology labels, scores and polarization.
    Ideology {
        #[command(flatten)]
        io: LogIo,
    },
    /// Stance toward humans and the leaning distribution.
    Stance {
        #[command(flatten)]
        io: LogIo,
    },
    /// Degree, clustering, path and reciprocity statistics.
    Graph {
        #[command(flatten)]
        io: LogIo,
        /// Needed when the path policy samples pairs.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
enum Experiment {
    /// Consequence-of-sharing probe: preamble vs no preamble.
    Cost {
        #[command(flatten)]
        io: LogIo,
        #[arg(long)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    use commands as c;
    match cli.command {
        Command::Simulate { config, seed, out } => c::simulate(&config, seed, &out),
        Command::Ingest { input, out, strict } => c::ingest(&input, &out, strict),
        Command::Analyze(a) => match a {
            Analysis::Homophily { io, seed } => c::homophily(&io.log, &io.out, io.config.as_deref(), seed),
            Analysis::Influence { io } => c::influence(&io.log, &io.out, io.config.as_deref()),
            Analysis::Toxicity { io } => c::toxicity(&io.log, &io.out, io.config.as_deref()),
            Analysis::Ideology { io } => c::ideology(&io.log, &io.out, io.config.as_deref()),
            Analysis::Stance { io } => c::stance(&io.log, &io.out, io.config.as_deref()),
            Analysis::Graph { io, seed } => c::graph(&io.log, &io.out, io.config.as_deref(), seed),
        },
        Command::Experiment(Experiment::Cost { io, seed }) => c::cost(&io.log, &io.out, io.config.as_deref(), seed),
        Command::Predict { io, seed, synthetic } => {
            let log = if synthetic { None } else { io.log.as_deref() };
            c::predict(log, &io.out, io.config.as_deref(), seed)
        }
        Command::Report { out } => c::report(&out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_env("AGENTNET_LOG").init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 1,
                CliError::Runtime(_) => 2,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn seed_is_required_for_simulate() {
        let r = Cli::try_parse_from(["agentnet", "simulate", "--config", "c.toml", "--out", "d"]);
        assert_eq!(r.unwrap_err().kind(), clap::error::ErrorKind::MissingRequiredArgument);
    }

    #[test]
    fn predict_needs_log_or_synthetic() {
        assert!(Cli::try_parse_from(["agentnet", "predict", "--out", "d", "--seed", "1"]).is_err());
        assert!(Cli::try_parse_from(["agentnet", "predict", "--out", "d", "--seed", "1", "--synthetic"]).is_ok());
    }
}
