//! `ddins`: configuration-driven pricing of drawdown and drawup insurance.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 validation breach.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "ddins", version, about = "Drawdown insurance pricing for spectrally negative Levy models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value of the configured contract at the configured state.
    Price(Common),
    /// Fair premium over a y grid (and a z grid for drawup contracts).
    FairPremium(Common),
    /// Cancellation value against theta, followed by the optimal level.
    OptimalCancel(Common),
    /// Analytic values against Monte Carlo on the built-in matrix.
    Validate(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set contract.a=12`. Repeatable; wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Primary sweep `start:stop:step`: y for fair-premium, theta for optimal-cancel.
    #[arg(long)]
    pub grid: Option<String>,
    /// Drawup sweep `start:stop:step` for fair-premium.
    #[arg(long)]
    pub zgrid: Option<String>,
}

/// Minimal configuration for `validate` when no file is given; the matrix fixes its own contracts.
const VALIDATE_BASE: [&str; 7] = [
    "model.type=bm",
    "model.mu=0.03",
    "model.sigma=0.4",
    "contract.type=dd",
    "contract.a=10",
    "contract.alpha=100",
    "contract.r=0.01",
];

fn overrides(cmd: &Command, c: &Common) -> Vec<String> {
    let mut v: Vec<String> = Vec::new();
    if matches!(cmd, Command::Validate(_)) && c.config.is_none() {
        v.extend(VALIDATE_BASE.iter().map(|s| s.to_string()));
    }
    v.extend(c.set.iter().cloned());
    let quoted = |s: &str| format!("\"{s}\"");
    if let Some(s) = c.seed {
        v.push(format!("mc.seed={s}"));
    }
    if let Some(n) = c.paths {
        v.push(format!("mc.paths={n}"));
    }
    if let Some(w) = c.workers {
        v.push(format!("mc.workers={w}"));
    }
    if let Some(o) = &c.out {
        v.push(format!("output.csv={}", quoted(&o.display().to_string())));
    }
    if let Some(g) = &c.grid {
        let key = if matches!(cmd, Command::OptimalCancel(_)) { "grid.theta" } else { "grid.y" };
        v.push(format!("{key}={}", quoted(g)));
    }
    if let Some(g) = &c.zgrid {
        v.push(format!("grid.z={}", quoted(g)));
    }
    v
}

pub fn run(cli: &Cli) -> Result<()> {
    let (Command::Price(c) | Command::FairPremium(c) | Command::OptimalCancel(c) | Command::Validate(c)) = &cli.command;
    let cfg = config::load(c.config.as_deref(), &overrides(&cli.command, c))?;
    let out = cfg.output.csv.as_ref().map(PathBuf::from);
    let report = match &cli.command {
        Command::Price(_) => commands::price(&cfg)?,
        Command::FairPremium(_) => commands::fair_premium(&cfg)?,
        Command::OptimalCancel(_) => commands::optimal_cancel(&cfg)?,
        Command::Validate(_) => {
            let rows = validate::run(&cfg.mc_config())?;
            validate::report(&rows).emit(out.as_deref(), cfg.output.precision)?;
            let n = validate::breaches(&rows);
            return if n == 0 { Ok(()) } else { Err(CliError::Breach(n)) };
        }
    };
    report.emit(out.as_deref(), cfg.output.precision)
}
