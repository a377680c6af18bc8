use std::path::PathBuf;

use cachecast::aggregate::Granularity;
use cachecast::forecast::ForecastTarget;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "cachecast", version, about = "Federated cache simulation and traffic forecasting pipeline")]
pub struct Cli {
    /// Overrides the RNG seed of the stage's config.
    #[arg(long, global = true, env = "CACHECAST_SEED")]
    pub seed: Option<u64>,

    /// Stage config file (TOML): workload for generate/calibrate, federation
    /// for simulate, forecast for forecast.
    #[arg(long, global = true, env = "CACHECAST_CONFIG")]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "CACHECAST_OUT", default_value = "out")]
    pub out: PathBuf,

    /// Worker threads for independent runs.
    #[arg(long, global = true, env = "CACHECAST_JOBS", default_value_t = 1)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic request trace.
    Generate(GenerateArgs),
    /// Resolve a request trace against a cache federation.
    Simulate(SimulateArgs),
    /// Bin a resolved trace into hourly or daily features.
    Aggregate(AggregateArgs),
    /// Train and evaluate LSTM forecasters on a bins CSV.
    Forecast(ForecastArgs),
    /// Render rate, volume and forecast charts with a markdown summary.
    Report(ReportArgs),
    /// Fit workload parameters to target hit rates.
    Calibrate(CalibrateArgs),
    /// Write the built-in default configs as TOML.
    Presets(PresetsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormatArg {
    Jsonl,
    Csv,
}

impl From<TraceFormatArg> for cachecast::trace::TraceFormat {
    fn from(f: TraceFormatArg) -> Self {
        match f {
            TraceFormatArg::Jsonl => cachecast::trace::TraceFormat::JsonLines,
            TraceFormatArg::Csv => cachecast::trace::TraceFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Use the built-in two-class workload at this scale when no --config is given.
    #[arg(long, default_value_t = 1e-3)]
    pub socal_scale: f64,

    #[arg(long, value_enum, default_value_t = TraceFormatArg::Jsonl)]
    pub format: TraceFormatArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Unified,
    Partitioned,
    Bypass,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Request trace (.jsonl or .csv).
    #[arg(long)]
    pub trace: PathBuf,

    /// Use the built-in 24-node federation at this capacity scale when no --config is given.
    #[arg(long, default_value_t = 1e-3)]
    pub socal_scale: f64,

    /// Replace the federation's policy. Repeat to compare policies side by side.
    #[arg(long = "policy", value_enum)]
    pub policies: Vec<PolicyArg>,

    /// Size at or above which the bypass policy serves from origin.
    #[arg(long, default_value_t = 1_000_000_000)]
    pub bypass_threshold: u64,

    #[arg(long, value_enum, default_value_t = TraceFormatArg::Jsonl)]
    pub format: TraceFormatArg,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Resolved trace (.jsonl or .csv).
    #[arg(long)]
    pub trace: PathBuf,

    #[arg(long, default_value_t = Granularity::Hourly)]
    pub granularity: Granularity,

    /// Keep only records of this file class.
    #[arg(long)]
    pub class: Option<String>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Bins CSV written by `aggregate`.
    #[arg(long)]
    pub bins: PathBuf,

    /// Targets to model; all six when omitted.
    #[arg(long = "target")]
    pub targets: Vec<ForecastTarget>,

    /// Also train against a trailing moving average of this many bins.
    #[arg(long = "smooth")]
    pub smooth: Vec<usize>,

    /// Overrides the config's epoch count.
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Resolved trace (.jsonl or .csv).
    #[arg(long)]
    pub trace: PathBuf,

    /// Output directory of a `forecast` run to overlay.
    #[arg(long)]
    pub forecast: Option<PathBuf>,

    #[arg(long, default_value_t = Granularity::Daily)]
    pub granularity: Granularity,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Federation config; the built-in federation at --socal-scale otherwise.
    #[arg(long)]
    pub federation: Option<PathBuf>,

    #[arg(long, default_value_t = 1e-3)]
    pub socal_scale: f64,

    #[arg(long, default_value_t = 0.676)]
    pub file_hit_rate: f64,

    #[arg(long, default_value_t = 0.354)]
    pub byte_hit_rate: f64,

    /// Maximum number of simulations.
    #[arg(long, default_value_t = 200)]
    pub budget: usize,

    #[arg(long, default_value_t = 0.005)]
    pub tolerance: f64,

    /// Days at the start of the horizon excluded from the hit rates.
    #[arg(long, default_value_t = 0.0)]
    pub warmup_days: f64,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub socal_scale: f64,
}
