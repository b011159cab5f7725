//! `bcr`: diagrams, knots and the invariants `Z_k` from the command line.
//!
//! Exit status: 0 on success, 1 on a domain error (invalid diagram or knot,
//! failed check), 2 on a usage error.

mod commands;
mod config;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Malformed invocation: exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// A check that ran and failed; its report is already on stdout.
#[derive(Debug)]
pub struct Failed(pub String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

#[derive(Parser, Debug)]
#[command(name = "bcr", version, about = "Bott–Cattaneo–Rossi invariants of long knots")]
pub struct Cli {
    /// `key = value` file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for sampling and root search (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output on standard error (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the diagrams of a degree up to isomorphism.
    Enumerate(EnumerateArgs),
    /// Check diagrams in a JSON file against the BCR rules.
    Validate(ValidateArgs),
    /// Codimension-one faces of diagrams.
    Faces(FacesArgs),
    /// Run the cycle-reversal, hidden and principal involutions exhaustively.
    Pairings(PairingsArgs),
    /// Validate or combine knot specifications.
    #[command(subcommand)]
    Knot(KnotCommand),
    /// Monte Carlo estimate of Z_k.
    Integrate(IntegrateArgs),
    /// Signed intersection count of Z_k.
    Count(CountArgs),
    /// Quick run of the invariant suite.
    Selftest(SelftestArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Density {
    Round,
    Bump,
}

impl std::str::FromStr for Density {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Density as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args, Debug)]
pub struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of standard output.
    #[arg(long, short = 'o', value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long, short = 'k')]
    degree: Option<usize>,
    /// One entry per numbered diagram instead of per diagram.
    #[arg(long)]
    numbered: bool,
    /// Dimension used for the orientation sign of numbered diagrams.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// JSON file holding one diagram object or an array of them.
    file: PathBuf,
    /// Dimension for the reported configuration-space dimension.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, short = 'o', value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FacesArgs {
    #[arg(long, short = 'k', conflicts_with = "diagram")]
    degree: Option<usize>,
    /// Diagram JSON file instead of a whole degree.
    #[arg(long, value_name = "FILE")]
    diagram: Option<PathBuf>,
    /// Include every face, not only the counts.
    #[arg(long)]
    list: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
pub struct PairingsArgs {
    #[arg(long, short = 'k')]
    degree: Option<usize>,
    /// Treat the sphere-factorisation pattern as vanishing.
    #[arg(long)]
    sphere_factorization: bool,
    #[arg(long, short = 'o', value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum KnotCommand {
    /// Parse and check a knot (builtin name or file).
    Validate {
        knot: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, short = 'o', value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Connected sum of two knots, written in the knot file format.
    Sum {
        a: String,
        b: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, short = 'o', value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    #[arg(long, short = 'k')]
    degree: Option<usize>,
    /// Builtin knot name or knot file.
    #[arg(long)]
    knot: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Samples per diagram.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    density: Option<Density>,
    /// Chordal radius of the bump densities.
    #[arg(long)]
    radius: Option<f64>,
    /// Seed of the bump centres (defaults to --seed).
    #[arg(long)]
    dir_seed: Option<u64>,
    /// Average each term with its cycle reversal on shared samples.
    #[arg(long)]
    pairing: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long, short = 'k')]
    degree: Option<usize>,
    #[arg(long)]
    knot: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Newton starts per numbered diagram.
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Seed of the direction family (defaults to --seed).
    #[arg(long)]
    dir_seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Also sign each root under the cycle-reversed diagram and average.
    #[arg(long)]
    pairing: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(u) = e.downcast_ref::<UsageError>() {
                eprintln!("error: {u}");
                eprintln!("run `bcr --help` for usage");
                ExitCode::from(2)
            } else if let Some(f) = e.downcast_ref::<Failed>() {
                eprintln!("{f}");
                ExitCode::from(1)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        }
    }
}
