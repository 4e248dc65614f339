use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use mixbgk::cli::{cmd_simulate, cmd_sweep, cmd_verify, load_config, parse_list, ExitStatus, RunConfig};
use mixbgk::mixture::Fault;

/// Two-species BGK mixture solver and verification suite.
#[derive(Debug, Parser)]
#[command(name = "mixbgk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration document.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the property suite and write verify_report.txt.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Inject a deliberate fault to check the suite's sensitivity.
        #[arg(long)]
        fault: Option<String>,
        /// Only count the kernel dimension at the configured (delta, omega).
        #[arg(long)]
        kernel_only: bool,
    },
    /// Run the configured scenario and write series.csv and summary.txt.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Fit decay rates over a grid of (delta, omega) and write rates.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated delta values; defaults to the configured delta.
        #[arg(long)]
        delta_list: Option<String>,
        /// Comma-separated omega values; defaults to the configured omega.
        #[arg(long)]
        omega_list: Option<String>,
    },
}

enum Failure {
    Config(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn load(common: &Common, kernel_only: bool) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))
        .map_err(|e| Failure::Config(format!("{e:#}")))?;
    let mut cfg = load_config(&text, kernel_only)
        .map_err(|e| Failure::Config(format!("{}: {e}", common.config.display())))?;
    if let Some(out) = &common.out {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn list(arg: &Option<String>, default: f64, name: &str) -> Result<Vec<f64>, Failure> {
    match arg {
        None => Ok(vec![default]),
        Some(s) => parse_list(s).map_err(|e| Failure::Config(format!("--{name}: {e}"))),
    }
}

fn dispatch(cli: Cli) -> Result<ExitStatus, Failure> {
    let outcome = match cli.command {
        Command::Verify {
            common,
            fault,
            kernel_only,
        } => {
            let mut cfg = load(&common, kernel_only)?;
            if let Some(name) = fault {
                cfg.verify.fault = Fault::parse(&name).ok_or_else(|| {
                    Failure::Config(format!("--fault: unknown fault `{name}` (known: {})", Fault::NAMES.join(", ")))
                })?;
            }
            cmd_verify(&cfg).context("verify")?.0
        }
        Command::Simulate { common } => {
            let cfg = load(&common, false)?;
            cmd_simulate(&cfg).context("simulate")?.0
        }
        Command::Sweep {
            common,
            delta_list,
            omega_list,
        } => {
            let cfg = load(&common, false)?;
            let deltas = list(&delta_list, cfg.mixture.delta, "delta-list")?;
            let omegas = list(&omega_list, cfg.mixture.omega, "omega-list")?;
            cmd_sweep(&cfg, &deltas, &omegas).context("sweep")?.0
        }
    };
    println!("{}", outcome.message);
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match dispatch(cli) {
        Ok(s) => s,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitStatus::InvalidConfig
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            let aborted = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<mixbgk::Error>(),
                    Some(mixbgk::Error::Negativity { .. } | mixbgk::Error::DegenerateCell { .. } | mixbgk::Error::InfeasibleTarget(_))
                )
            });
            let invalid = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<mixbgk::Error>(),
                    Some(mixbgk::Error::Inadmissible(_) | mixbgk::Error::InvalidInput(_) | mixbgk::Error::InvalidGrid(_))
                )
            });
            if aborted {
                ExitStatus::SolverAbort
            } else if invalid {
                ExitStatus::InvalidConfig
            } else {
                ExitStatus::CheckFailure
            }
        }
    };
    ExitCode::from(status.code() as u8)
}
