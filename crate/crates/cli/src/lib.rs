//! `subgrad` command-line tool.
//!
//! Exit codes: 0 success, 1 negative certificate slack, 2 usage or parse
//! error, 3 a mathematical precondition failed.

pub mod commands;
pub mod io;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

/// Failure of a subcommand, mapped to an exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Precondition(String),
    NegativeSlack(f64),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NegativeSlack(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Precondition(m) => f.write_str(m),
            CliError::NegativeSlack(s) => write!(f, "certificate slack {s} is negative"),
        }
    }
}

impl From<subgrad_core::Error> for CliError {
    fn from(e: subgrad_core::Error) -> Self {
        use subgrad_core::Error as E;
        match e {
            E::BadMultipliers(_)
            | E::LengthMismatch { .. }
            | E::DimensionMismatch { .. }
            | E::InvalidSet(_) => CliError::Usage(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "subgrad",
    version,
    about = "Polyak-type subgradient and projection methods"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a subgradient method on a piecewise-affine instance.
    Run {
        #[arg(long)]
        instance: PathBuf,
        /// polyak | polyak-t=T | adaptive-polyak | momentum-polyak | presized=R | fixed=H[,H...]
        #[arg(long, value_parser = commands::parse_solver)]
        solver: commands::Solver,
        #[arg(long)]
        iters: usize,
        /// none | ball=R[:C1,C2,...] | halfspace=A1,A2,...:B
        #[arg(long, default_value = "none", value_parser = commands::parse_projection)]
        project: subgrad_core::ProjectableSet,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Run a projection method on a feasibility instance.
    Feas {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        method: FeasMethod,
        #[arg(long)]
        iters: usize,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Print a rate bound with 12 significant digits.
    Bound {
        #[arg(long, value_enum)]
        which: BoundKind,
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "B", default_value_t = 1.0)]
        b: f64,
        #[arg(long = "R", default_value_t = 1.0)]
        r: f64,
    },
    /// Build a worst-case instance, run its method, and report the gap.
    Worstcase {
        #[arg(long, value_enum)]
        which: WorstcaseKind,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the weighted last-iterate inequality on a recorded trace.
    Certify {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        /// `auto-constant`, or a JSON file holding an array or `{"v": [...], "h_last": h}`
        #[arg(long, default_value = "auto-constant")]
        v: String,
        #[arg(long = "h-last")]
        h_last: Option<f64>,
    },
    /// Tabulate predicted against achieved values over a range of N.
    Sweep {
        #[arg(long, value_enum)]
        which: SweepKind,
        #[arg(long = "n-min")]
        n_min: usize,
        #[arg(long = "n-max")]
        n_max: usize,
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeasMethod {
    Greedy,
    AdaptiveGreedy,
    MomentumGreedy,
    Altproj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    Polyak,
    Optimal,
    Altproj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WorstcaseKind {
    Polyak,
    Altproj,
    Feasibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    PolyakExact,
    AltprojExact,
    AdaptiveBound,
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit code. Output goes to stdout, diagnostics to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut stdout = std::io::stdout().lock();
    match commands::execute(&cli.command, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
