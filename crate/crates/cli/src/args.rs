use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use truelearn_core::data::EventFormat;
use truelearn_core::sr_graph::{Omega, SrMetric};

#[derive(Parser, Debug)]
#[command(name = "truelearn", version, about = "Replay, tune and analyse engagement learner models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Replay test-split learners and write JSON and CSV reports.
    Evaluate(EvaluateArgs),
    /// Grid-search model hyperparameters on train-split learners.
    Tune(TuneArgs),
    /// Correlation and recall-curve tables from existing reports.
    Analyze(AnalyzeArgs),
    /// Parse an event log (and optionally an SR table) and report problems.
    ValidateData(ValidateArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    TruelearnNovel,
    SemanticTruelearn,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::TruelearnNovel => "TrueLearn Novel",
            ModelKind::SemanticTruelearn => "Semantic TrueLearn",
        }
    }
}

/// Inputs shared by every command that loads an event log.
#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Event log (CSV or JSON lines).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: EventFormat,
    /// Keep only the first K topics of every event.
    #[arg(long, value_name = "K")]
    pub top_k: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Pairwise semantic relatedness table (long or wide CSV).
    #[arg(long)]
    pub sr_table: Option<PathBuf>,
    /// Metric column to read from the SR table.
    #[arg(long, value_parser = parse_metric)]
    pub sr_metric: Option<SrMetric>,
    #[arg(long, value_enum, default_value = "truelearn-novel")]
    pub model: ModelKind,
    /// TOML file with [model], [propagation] and [analysis] tables.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    /// Restrict the run to the N learners with most events.
    #[arg(long, value_name = "N")]
    pub top_learners: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads for per-learner replay (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Size of the related-topic set; several values give one row each.
    #[arg(long, value_delimiter = ',', value_parser = parse_omega)]
    pub omega: Vec<Omega>,
    /// Also run the baseline and add paired one-tailed t-tests.
    #[arg(long)]
    pub compare: bool,
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_parser = parse_omega)]
    pub omega: Option<Omega>,
    /// CSV grid; each column names a [model] field, each row is one point.
    #[arg(long)]
    pub grid: PathBuf,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Report files written by `evaluate`.
    #[arg(long = "report", required = true)]
    pub reports: Vec<PathBuf>,
    /// Event log the reports were produced from.
    #[arg(long)]
    pub data: PathBuf,
    /// SR table used to build each learner's topic graph.
    #[arg(long)]
    pub sr_table: PathBuf,
    #[arg(long, value_parser = parse_metric)]
    pub sr_metric: Option<SrMetric>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub sr_table: Option<PathBuf>,
    #[arg(long, value_parser = parse_metric)]
    pub sr_metric: Option<SrMetric>,
}

fn parse_format(s: &str) -> Result<EventFormat, String> {
    s.parse()
}

fn parse_metric(s: &str) -> Result<SrMetric, String> {
    s.parse()
}

fn parse_omega(s: &str) -> Result<Omega, String> {
    s.parse()
}
