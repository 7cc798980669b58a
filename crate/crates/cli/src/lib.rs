//! Command-line front end for the hcme verification engine.
//!
//! `hcme <command> [--config <path>] [key=value ...]`

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

pub use commands::{execute, Check, Report};
pub use config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Ψ_s(a_t) by quadrature against the Legendre oracle.
    Spherical,
    /// Matrix elements by the circle and jet paths.
    Matel,
    /// Spherical-sector derivative identity sweep.
    #[value(name = "verify-a")]
    VerifyA,
    /// Dictionary fits of non-spherical matrix elements.
    Fit,
    /// Limits at exceptional spectral parameters.
    Limit,
    /// Complexified spherical functions and holomorphy checks.
    Crown,
    /// Short run of every check.
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spherical => "spherical",
            Command::Matel => "matel",
            Command::VerifyA => "verify-a",
            Command::Fit => "fit",
            Command::Limit => "limit",
            Command::Crown => "crown",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hcme", version, about = "Numerical verification of K-finite matrix element structure for SL(2,R)")]
pub struct Cli {
    pub command: Command,
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// key=value overrides applied after the file.
    pub overrides: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("[cli] config error: {0}")]
    Config(String),
    #[error("[cli] i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] hcme_core::Error),
}

impl CliError {
    /// 1 config/budget, 3 exceptional parameter, 4 rank-deficient,
    /// 2 tolerance-type module failures, 5 everything else.
    pub fn exit_code(&self) -> i32 {
        use hcme_core::Error as E;
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 5,
            CliError::Core(e) => match e {
                E::BudgetExceeded { .. } | E::InvalidInput { .. } => 1,
                E::ExceptionalParameter { .. } => 3,
                E::RankDeficient { .. } => 4,
                E::HoldoutMismatch { .. } | E::NonRemovable { .. } | E::OffTargetResidual { .. } => 2,
                _ => 5,
            },
        }
    }
}

/// Environment variable that overrides the `threads` key.
pub const THREADS_ENV: &str = "HCME_THREADS";

/// Runs the CLI on `args` (program name first); returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match drive(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "hcme: error: {e}");
            e.exit_code()
        }
    }
}

fn drive(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let config = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV} = '{v}' is not a thread count")))?,
        Err(_) => config.usize("threads", 1)?,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot build a pool of {threads} threads: {e}")))?;
    let report = pool.install(|| execute(cli.command, &config))?;
    let text = if report.is_table() { report.body.clone() } else { report.render() };
    match config.raw("output") {
        Some(path) if !path.is_empty() => {
            std::fs::write(path, text.as_bytes())?;
            out.write_all(report.summary().as_bytes())?;
        }
        _ => {
            out.write_all(text.as_bytes())?;
            if report.is_table() {
                err.write_all(report.summary().as_bytes())?;
            }
        }
    }
    if let Some(failed) = report.first_failure() {
        writeln!(
            err,
            "hcme: [{}] tolerance violated: {} = {:e} (tolerance {:e})",
            failed.module, failed.name, failed.value, failed.tolerance
        )?;
        return Ok(2);
    }
    Ok(0)
}
