//! Command-line orchestration for the `truelearn` binary.
//!
//! Every command returns a [`Failure`] tagged with the exit code it maps to:
//! `1` for usage and configuration problems, `2` for unreadable or
//! inconsistent data.

pub mod analyze;
pub mod args;
pub mod config;
pub mod evaluate;
pub mod manifest;
pub mod report;
pub mod tune;
pub mod validate;

use std::ffi::OsString;
use std::fmt;
use std::path::Path;

use clap::Parser;
use truelearn_core::data::{load_events, Dataset, FormatConfig, IngestReport};
use truelearn_core::sr_graph::{load_sr_table, SrLoadReport, SrMetric, SrTable};

use crate::args::{Cli, Command, DataArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Usage,
    Data,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: FailureKind::Usage,
            error: error.into(),
        }
    }

    pub fn data(error: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: FailureKind::Data,
            error: error.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Usage => EXIT_USAGE,
            FailureKind::Data => EXIT_DATA,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

/// Attaches an exit-code class to any error.
pub trait Classify<T> {
    fn usage_err(self) -> CmdResult<T>;
    fn data_err(self) -> CmdResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage_err(self) -> CmdResult<T> {
        self.map_err(Failure::usage)
    }

    fn data_err(self) -> CmdResult<T> {
        self.map_err(Failure::data)
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Evaluate(a) => evaluate::run(&a),
        Command::Tune(a) => tune::run(&a),
        Command::Analyze(a) => analyze::run(&a),
        Command::ValidateData(a) => validate::run(&a),
    }
}

pub(crate) fn load_dataset(args: &DataArgs) -> CmdResult<(Dataset, IngestReport)> {
    let cfg = FormatConfig {
        format: args.format,
        top_k: args.top_k,
    };
    if args.top_k == Some(0) {
        return Err(Failure::usage(anyhow::anyhow!("--top-k must be positive")));
    }
    let (dataset, report) = load_events(&args.data, &cfg)
        .map_err(|e| Failure::data(anyhow::Error::new(e).context(format!("loading {}", args.data.display()))))?;
    log::info!(
        "loaded {} events for {} learners from {}",
        report.events_loaded,
        dataset.n_learners(),
        args.data.display()
    );
    Ok((dataset, report))
}

pub(crate) fn load_table(path: &Path, metric: SrMetric) -> CmdResult<(SrTable, SrLoadReport)> {
    let (table, report) = load_sr_table(path, metric)
        .map_err(|e| Failure::data(anyhow::Error::new(e).context(format!("loading {}", path.display()))))?;
    log::info!("loaded {} {} pairs from {}", report.stored_pairs, metric.label(), path.display());
    Ok((table, report))
}

/// Runs `f` on a rayon pool capped at `workers` threads (`0` = default).
pub(crate) fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> CmdResult<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .usage_err()?;
    Ok(pool.install(f))
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &[u8]) -> CmdResult {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::usage(anyhow::Error::new(e).context(format!("creating {}", dir.display()))))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Failure::usage(anyhow::Error::new(e).context(format!("writing {}", path.display()))))?;
    log::info!("wrote {}", path.display());
    Ok(())
}
