//! The `moment-eval` command line.
//!
//! Exit codes: 0 on success, 1 for input or contract errors (unreadable or
//! malformed files, invalid options, missing prediction entries), 2 for
//! metric-domain errors such as an empty dataset or an empty split.

mod build;
mod config;
mod eval;

use std::ffi::OsString;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bench::BenchError;
use crate::domain::DomainError;
use crate::io::IoError;
use crate::metrics::MetricError;
use crate::postprocess::PostprocessError;

pub use config::{Settings, TauList};

pub const THREADS_ENV: &str = "MOMENT_EVAL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "moment-eval", version, about = "Multi-moment video retrieval evaluation and benchmark tools")]
pub struct Cli {
    /// Settings file (JSON object or key = value lines); flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; falls back to the settings file, then $MOMENT_EVAL_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<NonZeroUsize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score predictions with R@1, mAP, R_m and mAP_m.
    Eval(eval::EvalArgs),
    /// Group caption queries into multi-moment instances.
    Group(build::GroupArgs),
    /// Print benchmark composition statistics.
    Stats(build::StatsArgs),
    /// Partition a search benchmark into single/multi subsets with caption counterparts.
    Split(build::SplitArgs),
    /// Active-prediction diagnostics and the moments-vs-active curve.
    Diagnose(eval::DiagnoseArgs),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn metric(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<PostprocessError> for CliError {
    fn from(e: PostprocessError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::EmptyDataset | MetricError::NoThresholds => Self::metric(e.to_string()),
            other => Self::input(other.to_string()),
        }
    }
}

pub(crate) struct Context<'a> {
    pub settings: &'a Settings,
    pub stdout: &'a mut (dyn Write + Send),
    pub stderr: &'a mut (dyn Write + Send),
}

impl Context<'_> {
    /// Writes `text` to `path`, or to stdout when no path is set.
    pub fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<(), CliError> {
        match path {
            Some(p) => Ok(crate::io::report::write_text(p, text)?),
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::input(format!("stdout: {e}"))),
        }
    }

    pub fn note(&mut self, text: &str) {
        let _ = writeln!(self.stderr, "{text}");
    }
}

fn thread_count(flag: Option<NonZeroUsize>, settings: &Settings) -> Result<Option<NonZeroUsize>, CliError> {
    if let Some(n) = settings.get(flag, "threads")? {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::input(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        _ => Ok(None),
    }
}

fn execute(cli: Cli, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<(), CliError> {
    let settings = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let threads = thread_count(cli.threads, &settings)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.map_or(0, NonZeroUsize::get))
        .build()
        .map_err(|e| CliError::input(format!("cannot start worker pool: {e}")))?;
    let mut ctx = Context { settings: &settings, stdout, stderr };
    pool.install(|| match cli.command {
        Command::Eval(a) => eval::run_eval(a, &mut ctx),
        Command::Diagnose(a) => eval::run_diagnose(a, &mut ctx),
        Command::Group(a) => build::run_group(a, &mut ctx),
        Command::Stats(a) => build::run_stats(a, &mut ctx),
        Command::Split(a) => build::run_split(a, &mut ctx),
    })
}

/// Runs the command line with explicit output streams and returns the exit
/// code.
pub fn run_with<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    let code = run_with(args, &mut out, &mut err);
    let _ = out.flush();
    code
}
