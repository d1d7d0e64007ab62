//! `synergy`: triple-helix synergy measurement and decomposition over
//! company records.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use synergy_core::synth::Structure;
use synergy_core::{Scale, SectorFilter};

mod commands;
mod error;
mod output;
mod report;

use report::Format;

#[derive(Debug, Parser)]
#[command(name = "synergy", version, about = "Three-way mutual information of geography, technology and firm size, decomposed by region and sector")]
struct Cli {
    /// More log output on standard error (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean a company file against a ZIP concordance into an analysis sample.
    Ingest(IngestArgs),
    /// Synergy of a sample decomposed over groups at one geographic scale.
    Compute(ComputeArgs),
    /// Sector versus all-sector percent contributions per group.
    Specialize(SectorsArgs),
    /// Pearson and Spearman correlations of percent contributions across sectors.
    Correlate(SectorsArgs),
    /// Company counts per group and sector.
    Tally(SampleArgs),
    /// Generate a synthetic company file and matching concordance.
    Synth(SynthArgs),
    /// Check the streaming computation against the dense reference.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    companies: PathBuf,
    #[arg(long)]
    concordance: PathBuf,
    /// CBSA code alias file (`old_cbsa_code,new_cbsa_code`).
    #[arg(long)]
    aliases: Option<PathBuf>,
    /// Replacement sector rule file (`code,flags`).
    #[arg(long)]
    sector_rules: Option<PathBuf>,
    /// Cleaned sample output.
    #[arg(long)]
    out: PathBuf,
    /// Cleaning statistics output.
    #[arg(long)]
    stats: PathBuf,
    /// Drop companies whose known incorporation year is earlier.
    #[arg(long)]
    year_min: Option<i32>,
    /// Drop NACE codes with these prefixes (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    exclude_nace: Vec<String>,
    /// Format of the statistics file.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Cleaned sample written by `ingest`.
    #[arg(long)]
    sample: PathBuf,
    /// state, cbsa, csa, zip3 or size.
    #[arg(long, default_value = "state")]
    level: Scale,
    /// Drop NACE codes with these prefixes before analysis.
    #[arg(long, value_delimiter = ',')]
    exclude_nace: Vec<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Report file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[command(flatten)]
    sample: SampleArgs,
    /// all, htm, mhtm, kis or htkis.
    #[arg(long, default_value = "all")]
    sector: SectorFilter,
    /// Report only the first K groups and fold the rest into OTHER.
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Debug, Args)]
struct SectorsArgs {
    #[command(flatten)]
    sample: SampleArgs,
    /// Sectors to compare with the all-sector run.
    #[arg(long, value_delimiter = ',', default_value = "htm,mhtm,kis,htkis")]
    sectors: Vec<SectorFilter>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Generate the bundled multi-state fixture instead of a single spec.
    #[arg(long, conflicts_with_all = ["structure", "group"])]
    fixture: bool,
    /// independent, xor or copy.
    #[arg(long, default_value = "independent")]
    structure: Structure,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Categories per dimension as G,T,O.
    #[arg(long, value_delimiter = ',', num_args = 3, default_value = "2,2,2")]
    cards: Vec<u32>,
    /// Mixture group `KEY=STRUCTURE:N` (repeatable); group i is seeded with seed + i.
    #[arg(long)]
    group: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Company file output.
    #[arg(long)]
    companies: PathBuf,
    /// Concordance file output.
    #[arg(long)]
    concordance: PathBuf,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    sample: PathBuf,
    /// Also compare every group at this scale.
    #[arg(long)]
    level: Option<Scale>,
    #[arg(long, value_delimiter = ',')]
    exclude_nace: Vec<String>,
    /// Fail with exit 2 when any difference exceeds this many bits.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Compute(a) => commands::compute(a),
        Command::Specialize(a) => commands::specialize(a),
        Command::Correlate(a) => commands::correlate(a),
        Command::Tally(a) => commands::tally(a),
        Command::Synth(a) => commands::synth(a),
        Command::Oracle(a) => commands::oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("synergy: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
