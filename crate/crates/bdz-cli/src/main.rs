//! `bdz` command line: compress/decompress files, dump per-level codec
//! diagnostics, and run redundancy benchmarks against finite-state sources.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 corrupt input.

mod bench;
mod stats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bdz", version, about = "Lossless compression through binary decision diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file into a .bdz container
    Compress {
        input: PathBuf,
        output: PathBuf,
    },
    /// Restore the original file from a container
    Decompress {
        input: PathBuf,
        output: PathBuf,
    },
    /// Print the container geometry and the per-level bit budgets
    Stats {
        input: PathBuf,
        /// Emit the report as JSON instead of a table
        #[arg(long)]
        json: bool,
    },
    /// Sample a finite-state source and measure coding redundancy
    Bench {
        /// Source preset: bernoulli:THETA | markov:P0,P1,... | file:CONFIG
        #[arg(long)]
        source: String,
        /// Comma-separated list of string lengths in bits
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        /// Samples per length
        #[arg(long, default_value_t = 1)]
        reps: u64,
        /// Base seed; per-sample seeds derive from (seed, n, rep)
        #[arg(long)]
        seed: Option<u64>,
        /// Write the CSV here instead of standard output
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

pub enum AppError {
    Usage(String),
    Io(String),
    Corrupt(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Io(_) => 2,
            AppError::Corrupt(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Usage(m) | AppError::Io(m) | AppError::Corrupt(m) => m,
        }
    }
}

impl From<bdz::Error> for AppError {
    fn from(e: bdz::Error) -> Self {
        match e {
            bdz::Error::Corrupt(_) | bdz::Error::Structural(_) => AppError::Corrupt(e.to_string()),
            _ => AppError::Usage(e.to_string()),
        }
    }
}

pub fn read_file(path: &PathBuf) -> Result<Vec<u8>, AppError> {
    std::fs::read(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &PathBuf, data: &[u8]) -> Result<(), AppError> {
    std::fs::write(path, data).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if e.kind() == ErrorKind::DisplayHelp || e.kind() == ErrorKind::DisplayVersion =>
        {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Compress { input, output } => {
            let raw = read_file(&input)?;
            if raw.is_empty() {
                return Err(AppError::Usage(format!(
                    "{}: input file is empty",
                    input.display()
                )));
            }
            let bits = bdz::coder::bits_from_bytes(&raw);
            let packed = bdz::encode(&bits)?;
            write_file(&output, &packed)?;
            let ratio = packed.len() as f64 / raw.len() as f64;
            println!(
                "{} -> {}: {} -> {} bytes ({:.3}x)",
                input.display(),
                output.display(),
                raw.len(),
                packed.len(),
                ratio
            );
            Ok(())
        }
        Command::Decompress { input, output } => {
            let packed = read_file(&input)?;
            let bits = bdz::decode(&packed)?;
            let raw = bdz::coder::bytes_from_bits(&bits);
            write_file(&output, &raw)?;
            println!(
                "{} -> {}: {} -> {} bytes",
                input.display(),
                output.display(),
                packed.len(),
                raw.len()
            );
            Ok(())
        }
        Command::Stats { input, json } => {
            let raw = read_file(&input)?;
            if raw.is_empty() {
                return Err(AppError::Usage(format!(
                    "{}: input file is empty",
                    input.display()
                )));
            }
            let report = stats::build_report(&raw)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                print!("{}", stats::render_table(&report));
            }
            Ok(())
        }
        Command::Bench {
            source,
            n,
            reps,
            seed,
            csv,
        } => bench::run(&source, &n, reps, seed, csv.as_ref()),
    }
}
