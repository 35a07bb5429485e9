//! Command-line front end: ingestion, training, localization, evaluation
//! and fingerprint export on top of `slim-core`.

pub mod commands;
pub mod config;
pub mod input;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use slim_core::SlimError;

pub use commands::{cmd_eval, cmd_export_fingerprints, cmd_localize, cmd_parse_logs, cmd_train};
pub use config::{ColumnRoles, ConfigFile, RunConfig};

/// Version of every JSON document written by the CLI.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
/// `localize` found no firing rule in the window.
pub const EXIT_NO_SIGNAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] SlimError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Io { .. } => "io",
            CliError::Csv(_) => "csv",
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

/// One-line error report: `error: category=<cat> message=<text>`.
pub fn error_line(category: &str, message: &str) -> String {
    let flat: String = message.split_whitespace().collect::<Vec<_>>().join(" ");
    format!("error: category={category} message={flat}")
}

#[derive(Debug, Parser)]
#[command(name = "slim", version, about = "Interpretable rule sets for fault localization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one rule set per fault type from a labelled metrics CSV.
    Train(Flags),
    /// Rank fault types and services for an incident window CSV.
    Localize(Flags),
    /// Evaluate a model on a case manifest, or cross-validate on --data.
    Eval(Flags),
    /// Export per-fault-type metric fingerprints from a model.
    ExportFingerprints(Flags),
    /// Turn a log directory into per-interval novelty counts.
    ParseLogs(Flags),
}

/// Flags shared by all subcommands; each overrides the config file.
#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// Metrics CSV (training data or query window).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Log directory with `normal/` and `online/` subdirectories.
    #[arg(long)]
    pub logs: Option<PathBuf>,
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model file to read.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Case manifest for `eval`.
    #[arg(long)]
    pub cases: Option<PathBuf>,
    /// Output file; stdout when omitted (the model defaults to model.json).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Maximum number of rules per fault type.
    #[arg(short = 'K', long = "max-rules")]
    pub max_rules: Option<usize>,
    /// Maximum rule length.
    #[arg(short = 'l', long = "max-len")]
    pub max_len: Option<usize>,
    /// Quantile bins per numeric column.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Curvature parameter of the distortion schedule, in [0, 1].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Constant distortion weight instead of the schedule.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Declared fault types (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub fault_types: Option<Vec<String>>,
    /// Categorical columns (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub categorical: Option<Vec<String>>,
    /// Log aggregation interval in seconds.
    #[arg(long)]
    pub interval: Option<i64>,
    /// Folds for cross-validation in `eval`.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Seed for fold assignment.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print per-iteration selection diagnostics to stderr.
    #[arg(long)]
    pub trace: bool,
}

/// Parses arguments, runs the command and returns the exit code. Errors
/// are reported on stderr as a single line.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first));
            return EXIT_USAGE;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_line(e.category(), &e.to_string()));
            EXIT_ERROR
        }
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    let (flags, kind) = match command {
        Command::Train(f) => (f, 0),
        Command::Localize(f) => (f, 1),
        Command::Eval(f) => (f, 2),
        Command::ExportFingerprints(f) => (f, 3),
        Command::ParseLogs(f) => (f, 4),
    };
    let cfg = RunConfig::resolve(&flags)?;
    slim_core::par::with_workers(cfg.workers, || -> Result<i32, CliError> {
        let stdout = std::io::stdout();
        match kind {
            0 => {
                let summary = cmd_train(&cfg)?;
                write!(stdout.lock(), "{summary}").map_err(|e| CliError::io("<stdout>", e))?;
                Ok(EXIT_OK)
            }
            1 => {
                let out = cmd_localize(&cfg)?;
                emit(&cfg, &out.json)?;
                Ok(if out.no_signal { EXIT_NO_SIGNAL } else { EXIT_OK })
            }
            2 => {
                let out = cmd_eval(&cfg)?;
                if let Some(path) = &cfg.out {
                    commands::write_file(path, &out.json)?;
                }
                write!(stdout.lock(), "{}", out.table).map_err(|e| CliError::io("<stdout>", e))?;
                Ok(EXIT_OK)
            }
            3 => {
                emit(&cfg, &cmd_export_fingerprints(&cfg)?)?;
                Ok(EXIT_OK)
            }
            _ => {
                emit(&cfg, &cmd_parse_logs(&cfg)?)?;
                Ok(EXIT_OK)
            }
        }
    })
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => commands::write_file(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
        }
    }
}
