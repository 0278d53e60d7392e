//! Command-line front end for the heat-engine analysis: figure sweeps,
//! oracle convergence studies, regime classification and the lemma
//! verification suite.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};

use commands::Report;
use config::{RunConfig, Settings, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "carnot-breaker", version, about = "Single-shot heat engines beyond the Carnot efficiency")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Efficiency against a swept parameter, as CSV.
    Sweep,
    /// Oracle work against the closed-form minimum over a list of g, as CSV.
    Converge,
    /// Work class of a failure-probability family, as JSON.
    Classify,
    /// Randomized lemma checks; exits 1 on any violation.
    Verify,
    /// Design report at a single alpha_star, as JSON.
    Efficiency,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] carnot_core::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use carnot_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Unsupported(_) => EXIT_UNSUPPORTED,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Core(e) => match e {
                E::UnsupportedFamily(_) => EXIT_UNSUPPORTED,
                E::InvariantViolation(_) | E::Monotonicity { .. } | E::Solver(_) => EXIT_INVARIANT,
                E::Domain(_) | E::Alignment(_) | E::Size(_) | E::Bracket { .. } | E::Design(_) => EXIT_CONFIG,
            },
        }
    }
}

pub fn execute(command: Command, settings: &Settings) -> Result<Report, CliError> {
    let cfg = RunConfig::resolve(settings)?;
    match command {
        Command::Sweep => commands::cmd_sweep(&SweepSpec::from_settings(settings)?, &cfg),
        Command::Converge => commands::cmd_converge(&cfg),
        Command::Classify => commands::cmd_classify(settings),
        Command::Verify => commands::cmd_verify(&cfg),
        Command::Efficiency => commands::cmd_efficiency(&cfg),
    }
}

fn emit(report: &Report, settings: &Settings, stdout: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match &settings.out {
        Some(path) => std::fs::write(path, &report.body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(report.body.as_bytes()).map_err(io),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = cli
        .settings
        .clone()
        .layered()
        .and_then(|settings| execute(cli.command, &settings).and_then(|r| emit(&r, &settings, stdout).map(|_| r)));
    match result {
        Ok(Report { violation: None, .. }) => EXIT_OK,
        Ok(Report { violation: Some(msg), .. }) => {
            let _ = writeln!(stderr, "{}", CliError::Invariant(msg));
            EXIT_INVARIANT
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
