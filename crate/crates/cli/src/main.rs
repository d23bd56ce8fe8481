//! `wavecode`: wavelet synopses from the command line.
//!
//! Exit status is 0 on success, 2 for usage errors (bad flags, budgets or
//! size caps) and 3 for data errors (unreadable or malformed input).

mod bench;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wavecode::{FilterBank, LpNorm, Scaling};

#[derive(Parser)]
#[command(name = "wavecode", version, about = "Wavelet synopses under general error metrics")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the wavelet coefficients of a signal as CSV.
    Transform(TransformArgs),
    /// Select a B-term representation and report its errors.
    Compress(CompressArgs),
    /// Rebuild a signal from a representation file.
    Reconstruct(ReconstructArgs),
    /// Exhaustive optimum for a small signal.
    Oracle(OracleArgs),
    /// Write the periodic ramp dataset.
    GenSaw(GenSawArgs),
    /// Error-versus-budget and time-versus-length tables.
    Bench(bench::BenchArgs),
    /// Compress a PGM image.
    Image(ImageArgs),
}

#[derive(Args, Clone)]
pub struct SignalArgs {
    /// Signal file: one value per line, or CSV with --column.
    #[arg(long)]
    pub input: PathBuf,
    /// 0-based CSV column to read.
    #[arg(long)]
    pub column: Option<usize>,
    /// Zero-pad to the next power of two.
    #[arg(long)]
    pub pad: bool,
}

#[derive(Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub signal: SignalArgs,
    #[arg(long, default_value = "haar")]
    pub filter: FilterBank,
    #[arg(long, default_value = "orthonormal")]
    pub scaling: Scaling,
    /// CSV destination (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Greedy,
    Universal,
    Unrest,
    Finegrain,
    Rest,
    Hybrid,
    BestBasis,
    Spectrum,
    Bitcomplexity,
    Multiplane,
}

impl Algo {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RoundingArg {
    Auto,
    Uniform,
    PerLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    Bisect,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InnerArg {
    Greedy,
    Hybrid,
    Unrest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CodingArg {
    Flat,
    ScaleAware,
}

#[derive(Args)]
pub struct CompressArgs {
    /// Signal file; repeat for one file per plane with --algo multiplane.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub column: Option<usize>,
    #[arg(long)]
    pub pad: bool,
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Number of retained coefficients.
    #[arg(long = "B", default_value_t = 0)]
    pub budget: usize,
    /// Error norm: a real p >= 1 or `inf`.
    #[arg(long, default_value = "inf")]
    pub p: LpNorm,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value = "haar")]
    pub filter: FilterBank,
    /// Per-point weights, one per line (Haar dynamic programs only).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    pub rounding: RoundingArg,
    #[arg(long, value_enum, default_value = "bisect")]
    pub schedule: ScheduleArg,
    /// Add search statistics to the report.
    #[arg(long)]
    pub stats: bool,
    /// Inner algorithm for best-basis.
    #[arg(long, value_enum, default_value = "greedy")]
    pub inner: InnerArg,
    #[arg(long, default_value_t = 1)]
    pub min_block: usize,
    /// Bit budget for spectrum, bitcomplexity and multiplane.
    #[arg(long)]
    pub budget_bits: Option<u64>,
    /// Per-index costs `flat_index,bits` (spectrum; default: index coding).
    #[arg(long)]
    pub costs: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "flat")]
    pub index_coding: CodingArg,
    /// Largest fraction width tried by bitcomplexity.
    #[arg(long, default_value_t = 24)]
    pub frac_bits: u32,
    /// Bits per stored value in multiplane.
    #[arg(long, default_value_t = 32)]
    pub value_bits: u64,
    /// Extra norms to report, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,inf")]
    pub norms: Vec<LpNorm>,
    /// Representation file (one per plane for multiplane: `name.K`).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Reconstructed signal file.
    #[arg(long)]
    pub reconstruction: Option<PathBuf>,
    /// Report CSV (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReconstructArgs {
    /// Representation or cut file written by `compress`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub signal: SignalArgs,
    #[arg(long = "B")]
    pub budget: usize,
    #[arg(long, default_value = "inf")]
    pub p: LpNorm,
    #[arg(long, default_value = "haar")]
    pub filter: FilterBank,
    /// Fix retained values to the coefficients instead of optimizing them.
    #[arg(long)]
    pub restricted: bool,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenSawArgs {
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
    #[arg(long, default_value_t = 256)]
    pub period: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PgmArg {
    Binary,
    Ascii,
}

#[derive(Args)]
pub struct ImageArgs {
    /// PGM input (P2 or P5).
    #[arg(long, required_unless_present = "card")]
    pub input: Option<PathBuf>,
    /// Use a synthetic WIDTHxHEIGHT test card instead of --input.
    #[arg(long, conflicts_with = "input")]
    pub card: Option<String>,
    #[arg(long)]
    pub pad: bool,
    #[arg(long = "B")]
    pub budget: usize,
    #[arg(long, default_value = "2")]
    pub p: LpNorm,
    #[arg(long, default_value = "haar")]
    pub filter: FilterBank,
    /// Reconstructed PGM.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "binary")]
    pub format: PgmArg,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// A failure with its exit status.
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }
}

impl From<wavecode::Error> for Failure {
    fn from(e: wavecode::Error) -> Self {
        use wavecode::Error as E;
        let code = match &e {
            E::InvalidArgument(_)
            | E::InvalidNorm(_)
            | E::UnknownFilter(_)
            | E::BudgetTooLarge { .. }
            | E::SizeCap { .. } => 2,
            _ => 3,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 3, msg: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("wavecode: {e}");
            return ExitCode::from(2);
        }
    }
    let out = match cli.command {
        Command::Transform(a) => commands::transform(&a),
        Command::Compress(a) => commands::compress(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::GenSaw(a) => commands::gen_saw(&a),
        Command::Bench(a) => bench::run(&a),
        Command::Image(a) => commands::image(&a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("wavecode: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
