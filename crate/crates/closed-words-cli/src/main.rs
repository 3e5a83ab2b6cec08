//! Batch front end for the closed-words toolkit: exact censuses,
//! factor-avoidance counts, mu scans, invariant verification, and bound
//! reports.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Config, ConfigFlags};

#[derive(Parser)]
#[command(
    name = "closed-words",
    version,
    about = "Censuses of closed and privileged words, factor-avoidance counts, and bound reports"
)]
struct Cli {
    #[command(flatten)]
    flags: ConfigFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run (or load from cache) exact censuses and print n, C(n), B(n)
    Census {
        /// Lengths: a range `lo..hi` (inclusive), a single value, or a list
        #[arg(long)]
        n: String,
    },
    /// Exact count of length-n words avoiding a factor
    Avoid {
        /// The factor, e.g. `aa` (letters a-z for q <= 26, else `0,1,2`)
        #[arg(long)]
        w: String,
        #[arg(long)]
        n: usize,
        /// Also print the integer avoidance bound and the comparison
        #[arg(long)]
        bound: bool,
    },
    /// Maximal avoidance count mu(n, m) over all patterns of length m
    Mu {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Also print the integer avoidance bound and the comparison
        #[arg(long)]
        bound: bool,
    },
    /// Run the invariant suite (partition, subset, lemma1, lemma3, eq1)
    /// for every n up to a limit; nonzero exit if any check fails
    Verify {
        #[arg(long)]
        n_max: usize,
        /// Corrupt one count first (exercises the failure reporting)
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Evaluate a bound formula over a range of n and write a report file
    Bounds {
        /// Lengths: a range `lo..hi` (inclusive), a single value, or a list
        #[arg(long)]
        n: String,
        /// One of: prop2, thm1, cor1, lemma4, prop3, thm2
        #[arg(long)]
        formula: String,
        /// Report path (default: `<formula>_q<q>.<ext>`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize every cached census for the configured alphabet
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let config = Config::resolve(&cli.flags)?;
    let suppress = cli.flags.suppress_timestamp;
    match cli.command {
        Command::Census { n } => commands::census(&config, &n, suppress),
        Command::Avoid { w, n, bound } => commands::avoid(&config, &w, n, bound),
        Command::Mu { n, m, bound } => commands::mu(&config, n, m, bound),
        Command::Verify {
            n_max,
            inject_fault,
        } => commands::verify(&config, n_max, inject_fault, suppress),
        Command::Bounds { n, formula, out } => {
            commands::bounds(&config, &n, &formula, out, suppress)
        }
        Command::Report => commands::report(&config, suppress),
    }
}
