use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "misobench",
    version,
    about = "Scalar coding for open-loop MISO channels: rate curves, gaps and self-checks as CSV",
    after_help = "Exit codes: 0 success, 1 failed check or I/O error, 2 invalid arguments, 3 numerical failure.\n\
                  MISOBENCH_THREADS caps the worker threads (0 or unset: one per core)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ergodic rates of OPT, IR_BF, IR_ABBA, IR_TROMBI, IR_BF_A and worst-case TROMBI versus SNR.
    Figure2(Opts),
    /// High-SNR IR-BF-A gap versus the number of antennas, with the M -> inf limit.
    Figure4(Opts),
    /// Monte-Carlo gap to the white-input rate for several virtual-antenna counts.
    Figure5(Opts),
    /// Gap of the n-virtual-antenna scheme by quadrature (`--snr-db inf` and `--m inf` allowed).
    Gap(Opts),
    /// Ergodic rate of a single scheme.
    Mi(Opts),
    /// Checks that a randomized scheme's rate depends on the channel only through its norm.
    Ndo(Opts),
    /// Runs the invariant suite and prints a pass/fail table.
    Selftest(Opts),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Figure2(_) => "figure2",
            Command::Figure4(_) => "figure4",
            Command::Figure5(_) => "figure5",
            Command::Gap(_) => "gap",
            Command::Mi(_) => "mi",
            Command::Ndo(_) => "ndo",
            Command::Selftest(_) => "selftest",
        }
    }

    pub fn opts(&self) -> &Opts {
        match self {
            Command::Figure2(o)
            | Command::Figure4(o)
            | Command::Figure5(o)
            | Command::Gap(o)
            | Command::Mi(o)
            | Command::Ndo(o)
            | Command::Selftest(o) => o,
        }
    }
}

/// Flags shared by all commands; each command rejects the ones it does not use.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Number of transmit antennas (`inf` for the gap limit).
    #[arg(long)]
    pub m: Option<String>,
    /// Comma-separated antenna counts (figure4).
    #[arg(long, value_name = "LIST")]
    pub m_list: Option<String>,
    /// Number of virtual antennas.
    #[arg(long)]
    pub n_virtual: Option<usize>,
    /// Scheme name, e.g. IR_BF_A or IR_OSTBC(4).
    #[arg(long)]
    pub scheme: Option<String>,
    /// Single SNR in dB, or `inf`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "snr_db_range")]
    pub snr_db: Option<String>,
    /// SNR grid `A:B:STEP` in dB (default -10:40:2).
    #[arg(long, allow_hyphen_values = true, value_name = "A:B:STEP")]
    pub snr_db_range: Option<String>,
    /// Monte-Carlo trials per point.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random channel directions (ndo).
    #[arg(long)]
    pub directions: Option<usize>,
    /// Output file; stdout when absent or `-`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Evaluate the projection-radius pdf without its factor 2 (selftest mutation check).
    #[arg(long, hide = true)]
    pub debug_drop_pdf_factor: bool,
}

impl Opts {
    /// Names of the flags that were given.
    pub fn present(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut mark = |set: bool, name| {
            if set {
                v.push(name);
            }
        };
        mark(self.m.is_some(), "--m");
        mark(self.m_list.is_some(), "--m-list");
        mark(self.n_virtual.is_some(), "--n-virtual");
        mark(self.scheme.is_some(), "--scheme");
        mark(self.snr_db.is_some(), "--snr-db");
        mark(self.snr_db_range.is_some(), "--snr-db-range");
        mark(self.trials.is_some(), "--trials");
        mark(self.seed.is_some(), "--seed");
        mark(self.directions.is_some(), "--directions");
        mark(self.out.is_some(), "--out");
        mark(self.debug_drop_pdf_factor, "--debug-drop-pdf-factor");
        v
    }
}
