//! `bidder-select`: evaluate auctions, select bidders, generate instances and
//! run the property suites from the command line.

mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use bidder_select::auction::Format;
use bidder_select::capacity::BRUTE_FORCE_CAP;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::{Context, Output};

const THREADS_ENV: &str = "BIDDER_SELECT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "bidder-select", version, about = "Bidder selection for single-item auctions")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Brute-force oracles: never, when under the size cap, or always (error over the cap).
    #[arg(long, global = true, value_enum, default_value_t = OracleMode::Auto)]
    oracle: OracleMode,
    /// Largest bidder pool the oracles enumerate (at most 16).
    #[arg(long, global = true, default_value_t = BRUTE_FORCE_CAP)]
    cap_subsets: usize,
    /// Record wall-clock milliseconds per row (reports are no longer bit-for-bit reproducible).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Off,
    Auto,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Capacity,
    Cost,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Revenue of one auction format on the whole pool or a subset.
    Eval(EvalArgs),
    /// Run a selection algorithm, with brute-force oracles when feasible.
    Select(SelectArgs),
    /// Run a property suite on seeded random instances.
    Verify(VerifyArgs),
    /// Print a generated instance as JSON.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Seeded sweep of every selection algorithm over random instances.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Instance JSON file, or `-` for stdin.
    pub instance: PathBuf,
    /// ap | ar | spa | spp | myer
    #[arg(long)]
    pub auction: Format,
    /// Price (ap) or reserve (ar); optimized over the price grid when absent.
    #[arg(long)]
    pub price: Option<f64>,
    /// Comma-separated bidder ids; empty for the empty set. Defaults to every bidder.
    #[arg(long)]
    pub subset: Option<String>,
    /// Visiting order for spp: `input`, `best`, or comma-separated ids.
    #[arg(long, default_value = "input")]
    pub order: String,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub model: Model,
    /// ap | ar | spp | myer
    #[arg(long)]
    pub auction: Format,
    /// Visiting order for capacity spp: `input` or comma-separated ids.
    #[arg(long, default_value = "input")]
    pub order: String,
    /// Surplus assumed for the cost reserve-auction guarantee instead of the brute-force value.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// sandwich | submodular | xos | apc2 | arc-delta | partition | gap | all
    pub suite: String,
    /// Random instances per suite.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Random discrete bidders.
    Random {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long)]
        capacity: Option<usize>,
        /// Log-uniform cost range `lo,hi`.
        #[arg(long, value_delimiter = ',')]
        costs: Option<Vec<f64>>,
        /// Inclusive support size range `lo,hi`.
        #[arg(long, value_delimiter = ',', default_value = "2,5")]
        support: Vec<usize>,
        /// Value range `lo,hi` of the log-spaced value grid.
        #[arg(long, value_delimiter = ',', default_value = "1,20")]
        values: Vec<f64>,
        #[arg(long)]
        tie_free: bool,
        #[arg(long)]
        regular: bool,
    },
    /// Cost instance encoding a subset-sum problem.
    SubsetSum {
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<f64>,
        /// Target total.
        #[arg(long = "W")]
        total: f64,
    },
    /// I.i.d. instance on which anonymous pricing with costs loses a growing factor.
    Gap {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Largest value; defaults to n^2.
        #[arg(long)]
        vmax: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Instances per pool size and model.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    /// Pool sizes to sweep.
    #[arg(long, value_delimiter = ',', default_value = "4,8,12")]
    pub sizes: Vec<usize>,
}

/// Command line without `--out` and its value, so reports do not depend on where they are written.
fn recorded_command() -> String {
    let mut parts = Vec::new();
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if a == "--out" {
            args.next();
        } else if !a.starts_with("--out=") {
            parts.push(a);
        }
    }
    parts.join(" ")
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let threads: usize = raw.trim().parse().with_context(|| format!("{THREADS_ENV}={raw:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn sink(out: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    let ctx = Context {
        seed: cli.seed,
        oracle: cli.oracle,
        cap: cli.cap_subsets.min(BRUTE_FORCE_CAP),
        timings: cli.timings,
        command: recorded_command(),
    };
    let output = match &cli.command {
        Command::Eval(args) => commands::eval(&ctx, args)?,
        Command::Select(args) => commands::select(&ctx, args)?,
        Command::Verify(args) => commands::verify(&ctx, args)?,
        Command::Gen { kind } => commands::gen(&ctx, kind)?,
        Command::Bench(args) => commands::bench(&ctx, args)?,
    };
    if matches!(output, Output::Instance(_)) && cli.format == OutputFormat::Csv {
        bail!("gen writes instances as JSON only");
    }
    let mut out = sink(cli.out.as_ref())?;
    let passed = match output {
        Output::Instance(json) => {
            writeln!(out, "{json}")?;
            true
        }
        Output::Report { report, checks } => {
            match cli.format {
                OutputFormat::Json => report.write_json(&mut out)?,
                OutputFormat::Csv => report.write_csv(&mut out, checks)?,
            }
            report.violations == 0
        }
    };
    out.flush()?;
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
