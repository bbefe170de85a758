use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "elecvine", version, about = "Vine copula and tail dependence analysis of hourly electricity data")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Analysis config (TOML); command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed for every stochastic step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "ELECVINE_OUT", default_value = "elecvine-out")]
    pub out: PathBuf,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    /// Maximum number of parallel jobs.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InputArg {
    /// Hourly CSV in ingest format; defaults to `<out>/data.csv`.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read a raw hourly CSV, repair clock changes and write `<out>/data.csv`.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// TOML file mapping field names to CSV headers.
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Fit AR-GARCH marginals for one hour.
    FitMarginals {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..24))]
        hour: u8,
    },
    /// Fit marginals and an R-vine for one hour; writes the vine JSON.
    FitVine {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..24))]
        hour: u8,
    },
    /// Kendall-scenario tail measure of price for one pattern.
    Tail {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..24))]
        hour: u8,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Directions of demand, wind and solar, e.g. HLL.
        #[arg(long)]
        pattern: String,
        /// Use a fitted vine JSON instead of refitting.
        #[arg(long)]
        vine: Option<PathBuf>,
        #[arg(long)]
        n_mc: Option<usize>,
    },
    /// Global per-hour study: vine, Spearman, tail ratios, Kendall
    /// coefficients and scenario table.
    Scenarios {
        #[command(flatten)]
        input: InputArg,
        /// Comma-separated hours; defaults to the config.
        #[arg(long, value_delimiter = ',')]
        hours: Option<Vec<u8>>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        n_mc: Option<usize>,
    },
    /// Rolling-window study of vine-induced Spearman correlations.
    Roll {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, value_delimiter = ',')]
        hours: Option<Vec<u8>>,
        /// Window length in days.
        #[arg(long)]
        window: Option<usize>,
        /// Step between windows in days.
        #[arg(long)]
        step: Option<usize>,
        #[arg(long)]
        n_mc: Option<usize>,
    },
    /// Draw uniforms from a fitted vine JSON.
    Simulate {
        #[arg(long)]
        vine: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Generate a synthetic hourly dataset into `<out>/data.csv`.
    Synth {
        /// Number of days; 800 unless the generator spec sets it.
        #[arg(long)]
        days: Option<usize>,
        /// First date; 2015-01-01 unless the generator spec sets it.
        #[arg(long)]
        start: Option<NaiveDate>,
        /// Generator spec JSON; defaults to the built-in dependent generator.
        #[arg(long, conflicts_with = "independent")]
        generator: Option<PathBuf>,
        /// Use independent variables.
        #[arg(long)]
        independent: bool,
    },
}
