//! `symlab`: runs one experiment per invocation and writes CSV or JSON.
//!
//! Exit codes: 0 when every check passes, 1 when a physics check fails or a run aborts,
//! 2 for configuration and usage errors.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::config::{ConfigError, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "symlab", version, about = "Experiments on symmetric computing Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// JSON config with a "command" field; its command must match the subcommand if both are given.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for randomized probes and initial states.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Arrival-peak table (L, t*, p*) for the transfer chain.
    Transfer,
    /// Invariance suite with a pass/fail report.
    Verify,
    /// Runs tapes on the ring and compares with direct execution.
    Compute,
    /// Yes/no ground-energy separation.
    Qma,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Transfer => "transfer",
            Self::Verify => "verify",
            Self::Compute => "compute",
            Self::Qma => "qma",
        }
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    match (&cli.config, cli.command) {
        (Some(path), cmd) => {
            let cfg = ExperimentConfig::load(path)?;
            if let Some(cmd) = cmd {
                if cmd.name() != cfg.name() {
                    return Err(ConfigError(format!("config is for {:?}, not {:?}", cfg.name(), cmd.name())));
                }
            }
            Ok(cfg)
        }
        (None, Some(cmd)) => Ok(ExperimentConfig::default_for(cmd.name())),
        (None, None) => Err(ConfigError("give a subcommand or --config".into())),
    }
}

fn extra_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn run(cli: &Cli, cfg: &ExperimentConfig) -> Result<bool> {
    let outcome = match cfg {
        ExperimentConfig::Transfer(c) => {
            if c.traces && cli.out.is_none() {
                return Err(ConfigError("traces need --out".into()).into());
            }
            commands::transfer(c)?
        }
        ExperimentConfig::Verify(c) => commands::verify(c, cli.seed)?,
        ExperimentConfig::Compute(c) => commands::compute(c, cli.seed)?,
        ExperimentConfig::Qma(c) => commands::qma(c)?,
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &outcome.body)?;
            for (suffix, text) in &outcome.extras {
                std::fs::write(extra_path(path, suffix), text)?;
            }
        }
        None => print!("{}", outcome.body),
    }
    eprintln!("[{}] {}", cfg.name(), outcome.summary);
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
