//! Command-line front end of `misobench`.
//!
//! [`run`] parses the arguments, validates them for the chosen command,
//! computes the whole table inside a thread pool sized by
//! `MISOBENCH_THREADS`, then writes it. Results do not depend on the number
//! of threads.

pub mod args;
pub mod commands;
pub mod error;
pub mod format;
pub mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::Parser;

use args::{Cli, Command};
use commands::Report;
pub use error::{exit, CliError};

pub const THREADS_ENV: &str = "MISOBENCH_THREADS";

/// Worker count from `MISOBENCH_THREADS`; 0 or unset means one per core.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(_) => Err(CliError::Usage(format!("{THREADS_ENV} is not valid unicode"))),
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a non-negative integer, got '{v}'"))),
    }
}

/// Validates `command`'s flags and computes its output.
pub fn execute(command: &Command) -> Result<Report, CliError> {
    let opts = command.opts();
    match command {
        Command::Figure2(_) => commands::figure2(&commands::Figure2Params::from_opts(opts)?),
        Command::Figure4(_) => commands::figure4(&commands::Figure4Params::from_opts(opts)?),
        Command::Figure5(_) => commands::figure5(&commands::Figure5Params::from_opts(opts)?),
        Command::Gap(_) => commands::gap(&commands::GapParams::from_opts(opts)?),
        Command::Mi(_) => commands::mi(&commands::MiParams::from_opts(opts)?),
        Command::Ndo(_) => commands::ndo(&commands::NdoParams::from_opts(opts)?),
        Command::Selftest(_) => selftest::selftest(&selftest::SelftestParams::from_opts(opts)?),
    }
}

fn write_output(out: Option<&Path>, csv: &str) -> Result<(), CliError> {
    match out {
        Some(path) if path != Path::new("-") => std::fs::write(path, csv).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        _ => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(csv.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::VALIDATION
            } else {
                exit::SUCCESS
            };
        }
    };
    let name = cli.command.name();
    let fail = |e: CliError| {
        eprintln!("misobench {name}: {e}");
        e.exit_code()
    };

    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return fail(CliError::CheckFailed(format!("cannot start thread pool: {e}"))),
    };
    let report = match pool.install(|| execute(&cli.command)) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    for note in &report.notes {
        eprintln!("misobench {name}: {note}");
    }
    if let Err(e) = write_output(cli.command.opts().out.as_deref(), &report.csv) {
        return fail(e);
    }
    match report.failure {
        Some(msg) => fail(CliError::CheckFailed(msg)),
        None => exit::SUCCESS,
    }
}
