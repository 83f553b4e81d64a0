//! `decohist` — command-line front end for the decoherent-histories
//! toolkit: evaluate decoherence functionals of reversible circuits,
//! reproduce the record demos, check the `H = U + U†` facts, and measure
//! the algorithmic-probability advantage of randomly programmed
//! computers.
//!
//! Every subcommand writes one artifact (JSON or CSV) and prints a
//! one-line summary to standard output. Exit codes: 0 on success, 1 on
//! any input problem (bad flags, unreadable files, malformed circuits or
//! witnesses), 2 on internal errors. Identical arguments and seeds
//! produce byte-identical artifacts; environment variables are never
//! consulted.

mod commands;
mod config;
mod target;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

/// Failure classification driving the exit code.
#[derive(Debug)]
pub enum CliError {
    /// The caller's problem: bad flags, unreadable files, malformed
    /// circuits or witnesses. Exit code 1.
    Validation(String),
    /// Our problem: states that indicate a bug. Exit code 2.
    Internal(String),
}

pub type CliResult<T> = Result<T, CliError>;

/// Wraps any displayable error as a validation failure.
pub fn validation(err: impl std::fmt::Display) -> CliError {
    CliError::Validation(err.to_string())
}

/// Wraps any displayable error as an internal failure.
pub fn internal(err: impl std::fmt::Display) -> CliError {
    CliError::Internal(err.to_string())
}

#[derive(Parser)]
#[command(
    name = "decohist",
    version,
    about = "Decoherent histories of reversible computers and the \
             algorithmic-probability advantage of random programs",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the decoherence functional of a reversible circuit
    Decohere(DecohereArgs),
    /// Contrast an unrecorded superposition with a recorded one
    RecordDemo(RecordDemoArgs),
    /// Check the H = U + U† facts and the reach of the principal root
    Hamiltonian(HamiltonianArgs),
    /// Enumerate halting programs breadth-first up to a length cap
    Enumerate(EnumerateArgs),
    /// Run randomly programmed trials and tally their outputs
    Sample(SampleArgs),
    /// Bound the program-length complexity of a target string
    Khat(KhatArgs),
    /// Compare a randomly programmed computer against coin flipping
    Advantage(AdvantageArgs),
}

/// Which sites each epoch projects on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GrainKind {
    /// Every site, every epoch
    Full,
    /// Only the footprint of the step that produced each epoch
    Local,
}

/// How history pairs are visited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeKind {
    /// Every pair of histories
    Exhaustive,
    /// Classical diagonal plus randomly drawn off-diagonal pairs
    Sampled,
}

/// Artifact serialization format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatKind {
    Json,
    Csv,
}

// Config files reuse the clap value grammar, so parsing delegates to the
// same ValueEnum tables the command line uses.
macro_rules! value_enum_from_str {
    ($($kind:ty),*) => {$(
        impl FromStr for $kind {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                <Self as ValueEnum>::from_str(s, true)
            }
        }
    )*};
}

value_enum_from_str!(GrainKind, ModeKind, FormatKind);

#[derive(Args)]
pub struct DecohereArgs {
    /// Circuit file (grammar in docs/formats.md)
    #[arg(long, value_name = "FILE")]
    pub circuit: Option<PathBuf>,

    /// Initial state: uniform, basis:BITS (site 0 first), or random:SEED
    #[arg(long, default_value = "uniform")]
    pub state: String,

    /// Repeat the circuit this many times before evaluating
    #[arg(long, default_value_t = 1, value_name = "N")]
    pub steps: usize,

    /// Which sites each epoch projects on
    #[arg(long, value_enum, default_value_t = GrainKind::Full)]
    pub grain: GrainKind,

    /// How history pairs are visited
    #[arg(long, value_enum, default_value_t = ModeKind::Exhaustive)]
    pub mode: ModeKind,

    /// History pairs to draw in sampled mode
    #[arg(long, default_value_t = 100_000)]
    pub pairs: usize,

    /// Seed for sampled-mode pair draws
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Weak-decoherence threshold on |Re D(h, h')|
    #[arg(long, default_value = "1e-10")]
    pub tol_weak: f64,

    /// Artifact format
    #[arg(long, value_enum, default_value_t = FormatKind::Json)]
    pub format: FormatKind,

    /// Artifact path
    #[arg(long, default_value = "decohere.json")]
    pub out: PathBuf,

    /// key=value file supplying defaults for the flags above
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct RecordDemoArgs {
    /// Weak-decoherence threshold on |Re D(h, h')|
    #[arg(long, default_value = "1e-10")]
    pub tol_weak: f64,

    /// Artifact format
    #[arg(long, value_enum, default_value_t = FormatKind::Json)]
    pub format: FormatKind,

    /// Artifact path
    #[arg(long, default_value = "record_demo.json")]
    pub out: PathBuf,

    /// key=value file supplying defaults for the flags above
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct HamiltonianArgs {
    /// Circuit file (grammar in docs/formats.md)
    #[arg(long, value_name = "FILE")]
    pub circuit: Option<PathBuf>,

    /// Repeat the circuit this many times before evaluating
    #[arg(long, default_value_t = 1, value_name = "N")]
    pub steps: usize,

    /// Commutator threshold deciding whether a site is in the support
    #[arg(long, default_value = "1e-8")]
    pub tol_support: f64,

    /// Artifact format
    #[arg(long, value_enum, default_value_t = FormatKind::Json)]
    pub format: FormatKind,

    /// Artifact path
    #[arg(long, default_value = "hamiltonian.json")]
    pub out: PathBuf,

    /// key=value file supplying defaults for the flags above
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct EnumerateArgs {
    /// Program-length cap in bits
    #[arg(long, default_value_t = 18, value_name = "BITS")]
    pub l_max: usize,

    /// Step budget per run
    #[arg(long, default_value_t = 4096)]
    pub budget: u64,

    /// Artifact format
    #[arg(long, value_enum, default_value_t = FormatKind::Csv)]
    pub format: FormatKind,

    /// Artifact path
    #[arg(long, default_value = "enumeration.csv")]
    pub out: PathBuf,

    /// key=value file supplying defaults for the flags above
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct SampleArgs {
    /// Randomly programmed trials to run
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,

    /// Seed for the program-bit stream
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Step budget per run
    #[arg(long, default_value_t = 4096)]
    pub budget: u64,

    /// Treat runs needing more than this many program bits as
    /// non-halting (samples the truncated measure; default uncapped)
    #[arg(long, value_name = "BITS")]
    pub bit_cap: Option<usize>,

    /// Artifact format
    #[arg(long, value_enum, default_value_t = FormatKind::Csv)]
    pub format: FormatKind,

    /// Artifact path
    #[arg(long, default_value = "sample.csv")]
    pub out: PathBuf,

    /// key=value file supplying defaults for the flags above
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct KhatArgs {
    /// Target output: a 0/1 literal, 0^N, 1^N, or (BITS)^N
    #[arg(long)]
    pub target: Option<String>,

    /// Program-length cap for the enumeration, in bits
    #[arg(long, default_value_t = 18, value_name = "BITS")]
    pub l_max: usize,

    /// Step budget per run
    #[arg(long, default_value_t = 4096)]
    pub budget: u64,

    /// Witness program file, one 0/1 program per line
    #[arg(long, value_name = "FILE")]
    pub witness_file: Option<PathBuf>,

    /// Artifact format
    #[arg(long, value_enum, default_value_t = FormatKind::Json)]
    pub format: FormatKind,

    /// Artifact path
    #[arg(long, default_value = "khat.json")]
    pub out: PathBuf,

    /// key=value file supplying defaults for the flags above
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct AdvantageArgs {
    /// Target output: a 0/1 literal, 0^N, 1^N, or (BITS)^N
    #[arg(long)]
    pub target: Option<String>,

    /// Program-length cap for the enumeration, in bits
    #[arg(long, default_value_t = 18, value_name = "BITS")]
    pub l_max: usize,

    /// Step budget per run
    #[arg(long, default_value_t = 4096)]
    pub budget: u64,

    /// Witness program file, one 0/1 program per line
    #[arg(long, value_name = "FILE")]
    pub witness_file: Option<PathBuf>,

    /// Artifact format
    #[arg(long, value_enum, default_value_t = FormatKind::Json)]
    pub format: FormatKind,

    /// Artifact path
    #[arg(long, default_value = "advantage.json")]
    pub out: PathBuf,

    /// key=value file supplying defaults for the flags above
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

// A closed pipe on stdout/stderr must not turn a clean run into a
// panic, so all terminal writes discard errors.
fn emit_out(text: impl std::fmt::Display) {
    use std::io::Write as _;
    let _ = write!(std::io::stdout(), "{text}");
}

fn emit_err(text: impl std::fmt::Display) {
    use std::io::Write as _;
    let _ = write!(std::io::stderr(), "{text}");
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches_from(std::env::args_os()) {
        Ok(matches) => matches,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    emit_out(&err);
                    ExitCode::SUCCESS
                }
                _ => {
                    emit_err(&err);
                    ExitCode::from(1)
                }
            };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(err) => {
            emit_err(&err);
            return ExitCode::from(1);
        }
    };
    let sub_matches = match matches.subcommand() {
        Some((_, sub_matches)) => sub_matches,
        None => {
            emit_err("internal error: parsed arguments carry no subcommand\n");
            return ExitCode::from(2);
        }
    };
    match commands::dispatch(cli.command, sub_matches) {
        Ok(summary) => {
            emit_out(format_args!("{summary}\n"));
            ExitCode::SUCCESS
        }
        Err(CliError::Validation(message)) => {
            emit_err(format_args!("error: {message}\n"));
            ExitCode::from(1)
        }
        Err(CliError::Internal(message)) => {
            emit_err(format_args!("internal error: {message}\n"));
            ExitCode::from(2)
        }
    }
}
