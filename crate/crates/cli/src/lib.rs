//! Command line front end: figure data emitters and solver reports.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
mod figures;
pub mod output;
mod solvers;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{resolve, RunConfig};
use output::Table;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] cavity_bec::error::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    /// 2 for bad parameters, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } | CliError::Output(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Lattice-count residual, its running supremum and power-law fit.
    Fig1,
    /// Condensate fraction against T/Tc0: bulk, corrected and exact.
    Fig2,
    /// Condensation regime over a grid of edge ratios.
    Fig3,
    /// Charge fractions of the ground state and excitation classes against T.
    Fig4,
    /// Finite-size critical temperature and multistep markers.
    Tc,
    /// Lattice points n with Σ a_i² n_i² ≤ ε.
    Count,
    /// Regime label and inequality margins of one cavity.
    Classify,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Tc => "tc",
            Command::Count => "count",
            Command::Classify => "classify",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cavity-bec",
    version,
    about = "Finite-size and multistep condensation of a charged Bose gas in a box"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

/// Every option is accepted by every subcommand; options a subcommand does
/// not read are rejected after parsing.
#[derive(Debug, Default, Args)]
pub struct Opts {
    /// Named parameter set (fig1a, fig1b, fig2, fig3, fig4a to fig4e).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// File of `key = value` lines, overridden by flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Edge lengths, in any order.
    #[arg(long = "L1", global = true, allow_hyphen_values = true)]
    pub l1: Option<String>,
    #[arg(long = "L2", global = true, allow_hyphen_values = true)]
    pub l2: Option<String>,
    #[arg(long = "L3", global = true, allow_hyphen_values = true)]
    pub l3: Option<String>,
    /// Boundary condition: neumann or dirichlet.
    #[arg(long, global = true)]
    pub bc: Option<String>,
    /// Particle mass.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub m: Option<String>,
    /// Total charge.
    #[arg(long = "Q", global = true, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// exact, asymptotic or both.
    #[arg(long, global = true)]
    pub engine: Option<String>,
    /// Lowest sweep temperature.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tmin: Option<String>,
    /// Highest sweep temperature.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tmax: Option<String>,
    /// Sweep points, or grid points per axis for fig3.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// linear or log temperature spacing.
    #[arg(long, global = true)]
    pub scale: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// csv, json or table.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Comma-separated anisotropy vector.
    #[arg(long, global = true)]
    pub a: Option<String>,
    /// Energy bound of `count`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub epsilon: Option<String>,
    /// Largest ε of the fig1 sweep.
    #[arg(long = "epsilon-max", global = true, allow_hyphen_values = true)]
    pub epsilon_max: Option<String>,
    /// Smallest ε entering the fig1 power-law fit.
    #[arg(long = "fit-floor", global = true, allow_hyphen_values = true)]
    pub fit_floor: Option<String>,
    /// Factor by which one side of a strong inequality must win.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub dominance: Option<String>,
    /// πQ/(mL2) held fixed across the fig3 grid.
    #[arg(long = "q-tilde", global = true, allow_hyphen_values = true)]
    pub q_tilde: Option<String>,
    /// Decades spanned by each fig3 axis.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub decades: Option<String>,
}

impl Opts {
    fn flags(&self) -> Vec<(&'static str, String)> {
        let all = [
            ("L1", &self.l1),
            ("L2", &self.l2),
            ("L3", &self.l3),
            ("bc", &self.bc),
            ("m", &self.m),
            ("Q", &self.q),
            ("engine", &self.engine),
            ("tmin", &self.tmin),
            ("tmax", &self.tmax),
            ("points", &self.points),
            ("scale", &self.scale),
            ("out", &self.out),
            ("format", &self.format),
            ("a", &self.a),
            ("epsilon", &self.epsilon),
            ("epsilon-max", &self.epsilon_max),
            ("fit-floor", &self.fit_floor),
            ("dominance", &self.dominance),
            ("q-tilde", &self.q_tilde),
            ("decades", &self.decades),
        ];
        all.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect()
    }
}

/// Resolves and validates the configuration of a parsed command line.
pub fn configure(cli: &Cli) -> Result<RunConfig, CliError> {
    let r = resolve(cli.command, cli.opts.preset.as_deref(), cli.opts.config.as_deref(), &cli.opts.flags())?;
    RunConfig::from_resolved(&r)
}

/// Computes the table of a validated configuration.
pub fn compute(cfg: &RunConfig) -> Result<Table, CliError> {
    let mut t = match cfg.command {
        Command::Fig1 => figures::fig1(cfg)?,
        Command::Fig2 => figures::fig2(cfg)?,
        Command::Fig3 => figures::fig3(cfg)?,
        Command::Fig4 => figures::fig4(cfg)?,
        Command::Tc => solvers::tc(cfg)?,
        Command::Count => solvers::count(cfg)?,
        Command::Classify => solvers::classify(cfg)?,
    };
    let mut head = Table::new(&[]);
    head.meta("tool", concat!("cavity-bec ", env!("CARGO_PKG_VERSION")));
    head.meta("command", cfg.command.as_str());
    head.meta("preset", cfg.preset.unwrap_or("none"));
    head.meta("config", cfg.config.as_ref().map_or("none".to_string(), |p| p.display().to_string()));
    for (k, s) in &cfg.echo {
        head.meta_sourced(*k, s.value.clone(), s.source.to_string());
    }
    head.meta.append(&mut t.meta);
    t.meta = head.meta;
    Ok(t)
}

/// Runs one command line end to end.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = configure(cli)?;
    let table = compute(&cfg)?;
    let text = table.render(cfg.format)?;
    match &cfg.out {
        Some(path) => {
            fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            if let Some(s) = table.meta_value("summary") {
                eprintln!("{s}");
            }
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "stdout".into(), source })?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use cavity_bec::error::Error;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Validation("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(Error::InvalidInput("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(Error::BudgetExceeded { needed: 1e12, budget: 1 }).exit_code(), 2);
        let solver = Error::NonConvergence { what: "root", detail: "stalled".into() };
        assert_eq!(CliError::Core(solver).exit_code(), 3);
        assert_eq!(CliError::Core(Error::NoRoot { what: "root", detail: String::new() }).exit_code(), 3);
        assert_eq!(CliError::Output("x".into()).exit_code(), 1);
    }
}
