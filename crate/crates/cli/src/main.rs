//! `rsbench`: build manifests, extract features, evaluate embeddings and run
//! benchmark sweeps from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status for configuration problems (bad flags, bad config file).
const EXIT_CONFIG: u8 = 2;
/// Exit status for unreadable or inconsistent data.
const EXIT_DATA: u8 = 3;
/// Exit status when a benchmark finished but some cells failed.
const EXIT_CELLS: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "rsbench", version, about = "Baseline benchmarks for remote-sensing scene classification")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Benchmark config file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for extraction and KNN [default: all cores]
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for stochastic extractors; overrides the config's seed list
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Open every image of a manifest before using it
    #[arg(long, global = true)]
    verify: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dataset manifests
    #[command(subcommand)]
    Manifest(ManifestCmd),
    /// Channel statistics
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Extract features for a manifest
    Extract(commands::ExtractArgs),
    /// Move embeddings in and out of the toolkit's format
    #[command(subcommand)]
    Embeddings(EmbeddingsCmd),
    /// KNN evaluation of an embedding file
    Evaluate(commands::EvaluateArgs),
    /// Benchmark sweeps
    #[command(subcommand)]
    Benchmark(BenchmarkCmd),
    /// Tables and resize deltas from results
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand, Debug)]
enum ManifestCmd {
    /// Build manifest.csv and classes.txt for a dataset
    Build(commands::ManifestArgs),
}

#[derive(Subcommand, Debug)]
enum StatsCmd {
    /// Per-channel mean/std over the train split, written as a preset CSV
    Compute(commands::StatsArgs),
}

#[derive(Subcommand, Debug)]
enum EmbeddingsCmd {
    /// Convert `id,f0,f1,...` CSV into an embedding file pair
    Import(commands::ImportArgs),
    /// Convert an embedding file pair into CSV
    Export(commands::ExportArgs),
}

#[derive(Subcommand, Debug)]
enum BenchmarkCmd {
    /// Run every missing cell of the config
    Run,
}

#[derive(Subcommand, Debug)]
enum ReportCmd {
    /// Aggregated results table
    Table(commands::TableArgs),
    /// Metric change between two pipelines
    Delta(commands::DeltaArgs),
}

/// A command failure carrying its exit status.
#[derive(Debug)]
pub(crate) enum Failure {
    Config(String),
    Data(String),
    Cells(usize),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Data(_) => EXIT_DATA,
            Failure::Cells(_) => EXIT_CELLS,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) | Failure::Data(m) => f.write_str(m),
            Failure::Cells(n) => write!(f, "{n} benchmark cell(s) failed; see the results file"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.global.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let g = &cli.global;
    let outcome = match cli.command {
        Command::Manifest(ManifestCmd::Build(a)) => commands::manifest_build(g, &a),
        Command::Stats(StatsCmd::Compute(a)) => commands::stats_compute(g, &a),
        Command::Extract(a) => commands::extract(g, &a),
        Command::Embeddings(EmbeddingsCmd::Import(a)) => commands::embeddings_import(g, &a),
        Command::Embeddings(EmbeddingsCmd::Export(a)) => commands::embeddings_export(g, &a),
        Command::Evaluate(a) => commands::evaluate(g, &a),
        Command::Benchmark(BenchmarkCmd::Run) => commands::benchmark_run(g),
        Command::Report(ReportCmd::Table(a)) => commands::report_table(g, &a),
        Command::Report(ReportCmd::Delta(a)) => commands::report_delta(g, &a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rsbench: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
