//! Command-line front end: `pdcsample sample | table | bench | verify`.
//!
//! Exit codes: 0 success, 1 statistical failure, 2 exact mismatch,
//! 3 invalid configuration or I/O error, 4 attempt budget exhausted.

pub mod bench;
pub mod record;
pub mod sample;
pub mod table;
pub mod verify;

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdc_core::{Error, IndexPolicy, Method, Mode, Structure, StructureSpec, Tilt};

/// Environment variable holding the default arithmetic mode.
pub const MODE_ENV: &str = "PDC_MODE";

#[derive(Debug, Parser)]
#[command(name = "pdcsample", version, about = "Exact uniform sampling of partitions and related structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw uniform objects of weight n.
    Sample(SampleArgs),
    /// Dump a table of restricted counts.
    Table(TableArgs),
    /// Measure rejection costs over a grid of cells.
    Bench(BenchArgs),
    /// Check samples and tables against brute-force oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    #[arg(long, value_parser = parse_via::<Structure>, default_value = "partitions")]
    pub structure: Structure,
    #[arg(long)]
    pub n: usize,
    /// Tilt `x` as `a/b` or a decimal; defaults to the family's optimum.
    #[arg(long, value_parser = parse_via::<Tilt>)]
    pub tilt: Option<Tilt>,
    /// Comma-separated `m_1,..,m_n`.
    #[arg(long, value_delimiter = ',')]
    pub multiplicities: Option<Vec<u64>>,
    /// Comma-separated `w_1,..,w_n`.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<usize>>,
}

impl SpecArgs {
    pub fn spec(&self) -> pdc_core::Result<StructureSpec> {
        let mut spec = self.structure.spec(self.n)?;
        if let Some(t) = &self.tilt {
            spec = spec.with_tilt(t.clone())?;
        }
        if let Some(m) = &self.multiplicities {
            spec = spec.with_multiplicities(m.clone())?;
        }
        if let Some(w) = &self.weights {
            spec = spec.with_weights(w.clone())?;
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, value_parser = parse_via::<Method>, default_value = "pdc-recursive")]
    pub method: Method,
    /// `prefix:k`, `window:a` or `singleton:i`.
    #[arg(long, value_parser = parse_via::<IndexPolicy>)]
    pub policy: Option<IndexPolicy>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Root seed; drawn from the OS when absent and echoed in every record.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_via::<Mode>, env = MODE_ENV, default_value = "fast")]
    pub mode: Mode,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: Format,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Emit records in draw order even with several workers.
    #[arg(long)]
    pub ordered: bool,
    #[arg(long)]
    pub attempt_cap: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(long, value_parser = parse_via::<Structure>, default_value = "partitions")]
    pub structure: Structure,
    #[arg(long)]
    pub n: usize,
    /// Largest part, for partitions and distinct partitions.
    #[arg(long)]
    pub k: Option<usize>,
    /// Index set of a restricted table.
    #[arg(long, value_parser = parse_via::<IndexPolicy>)]
    pub policy: Option<IndexPolicy>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// CSV file of `structure,method,n[,policy]` lines.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// A single cell given inline: `structure,method,n[,policy]`.
    #[arg(long)]
    pub cell: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub attempt_cap: Option<u64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_via::<Structure>, default_value = "partitions")]
    pub structure: Structure,
    #[arg(long)]
    pub n: Option<usize>,
    /// JSONL records from `sample`; without it, fresh samples are drawn.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// A table dump to re-derive and compare.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Samples per method when drawing fresh ones.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_via::<Mode>, env = MODE_ENV, default_value = "fast")]
    pub mode: Mode,
    /// Family-wise significance level, split over all tests.
    #[arg(long, default_value_t = 0.001)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

fn parse_via<T>(s: &str) -> Result<T, String>
where
    T: std::str::FromStr<Err = Error>,
{
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure classes and their exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Statistical = 1,
    ExactMismatch = 2,
    Config = 3,
    Budget = 4,
}

/// An error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub failure: Failure,
    pub message: String,
}

impl CliError {
    pub fn new(failure: Failure, message: impl Into<String>) -> Self {
        CliError {
            failure,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let failure = match e {
            Error::BudgetExhausted { .. } => Failure::Budget,
            Error::InconsistentTable(_) | Error::NegativeCount { .. } | Error::UnmappedSample(_) | Error::NonUniform(_) => {
                Failure::ExactMismatch
            }
            _ => Failure::Config,
        };
        CliError::new(failure, e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::new(Failure::Config, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Opens `path`, or standard output when absent.
pub(crate) fn open_output(path: Option<&PathBuf>) -> CliResult<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

pub(crate) fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

/// Runs a parsed command.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sample(a) => sample::run(&a),
        Command::Table(a) => table::run(&a),
        Command::Bench(a) => bench::run(&a),
        Command::Verify(a) => verify::run(&a),
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Failure::Config as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pdcsample: {e}");
            ExitCode::from(e.failure as u8)
        }
    }
}

pub fn main_from_env() -> ExitCode {
    main_with_args(std::env::args_os())
}
