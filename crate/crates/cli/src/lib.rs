//! Command-line front end: parses flags and config files, runs a pipeline,
//! and writes deterministic CSV/JSON artifacts.
//!
//! Exit codes: 0 on success, 2 for rejected input (flags, config, parameters,
//! IO), 3 for numerical failures. Every failure prints a JSON error report on
//! stderr.

pub mod config;
pub mod pipelines;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use motherbody::export::{self, Table};
use motherbody::Exec;

pub use config::{load_config, CommandKind, ConfigError, Format, RouteArg, Settings};
pub use pipelines::Output;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Name of the environment variable that caps the worker count.
pub const THREADS_ENV: &str = "MOTHERBODY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "motherbody", version, about = "Droplet, spectral curve, equilibrium measures and exact orthogonal polynomials for V = c log(z^2 + a^2)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommandArgs {
    /// TOML file with default settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub settings: Settings,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Critical times t_c and t* of the phase diagram.
    Phase(CommandArgs),
    /// Conformal map, boundary samples and harmonic moments.
    Droplet(CommandArgs),
    /// Mother-body and constrained equilibrium measures.
    Measures(CommandArgs),
    /// Spectral curve constants and discriminant.
    Spectral(CommandArgs),
    /// Exact orthogonal polynomial and its zeros.
    Oracle(CommandArgs),
    /// Full acceptance suite.
    VerifyAll(CommandArgs),
}

impl Command {
    pub fn parts(&self) -> (CommandKind, &CommandArgs) {
        match self {
            Command::Phase(a) => (CommandKind::Phase, a),
            Command::Droplet(a) => (CommandKind::Droplet, a),
            Command::Measures(a) => (CommandKind::Measures, a),
            Command::Spectral(a) => (CommandKind::Spectral, a),
            Command::Oracle(a) => (CommandKind::Oracle, a),
            Command::VerifyAll(a) => (CommandKind::VerifyAll, a),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] motherbody::Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) | CliError::Config(_) => "ParseError",
            CliError::Invalid(_) => "InvalidParams",
            CliError::Io(_) => "IoError",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            kind: self.kind().into(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}

/// Written to stderr on failure.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

/// Applies `MOTHERBODY_THREADS` if set.
fn apply_thread_cap() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Parse(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
    // A pool built earlier in the same process keeps its size.
    let _ = motherbody::exec::set_max_threads(threads);
    Ok(())
}

/// Runs one subcommand on merged settings.
pub fn execute(kind: CommandKind, s: &Settings) -> Result<Output, CliError> {
    let exec = Exec::Parallel;
    match kind {
        CommandKind::Phase => pipelines::phase(s),
        CommandKind::Droplet => pipelines::droplet(s),
        CommandKind::Measures => pipelines::measures(s, exec),
        CommandKind::Spectral => pipelines::spectral(s),
        CommandKind::Oracle => pipelines::oracle(s, exec),
        CommandKind::VerifyAll => pipelines::verify_all(s, exec),
    }
}

#[derive(Serialize)]
struct JsonTable<'a> {
    columns: &'a [String],
    rows: &'a [Vec<f64>],
}

fn write_table(dir: &Path, name: &str, table: &Table, format: Format) -> std::io::Result<()> {
    match format {
        Format::Csv => export::write_csv(table, &dir.join(format!("{name}.csv"))),
        Format::Json => export::write_json(
            &JsonTable { columns: &table.header, rows: &table.rows },
            &dir.join(format!("{name}.json")),
        ),
    }
}

/// Writes `summary.json` and every table into `dir`.
pub fn write_artifacts(dir: &Path, kind: CommandKind, out: &Output, format: Format) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let name = format!("{}.json", kind.name());
    export::write_json(&out.summary, &dir.join(name))?;
    for (table_name, table) in &out.tables {
        write_table(dir, table_name, table, format)?;
    }
    Ok(())
}

fn run_parsed(cli: Cli) -> Result<String, CliError> {
    apply_thread_cap()?;
    let (kind, args) = cli.command.parts();
    let settings = load_config(args.config.as_deref(), kind, args.settings.clone())?;
    let out = execute(kind, &settings)?;
    if let Some(dir) = &settings.out {
        write_artifacts(dir, kind, &out, settings.format.unwrap_or_default())?;
    }
    export::to_json_string(&out.summary).map_err(|e| CliError::Io(std::io::Error::other(e)))
}

/// Parses `argv`, runs the command, prints the summary or error report and
/// returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = match Cli::try_parse_from(argv) {
        Ok(cli) => run_parsed(cli),
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
        Err(e) => Err(CliError::Parse(e.render().to_string().trim_end().to_string())),
    };
    match result {
        Ok(summary) => {
            if stdout.write_all(summary.as_bytes()).is_err() {
                return EXIT_INPUT;
            }
            EXIT_OK
        }
        Err(e) => {
            let report = export::to_json_string(&e.report())
                .unwrap_or_else(|_| format!("{{\"message\": {:?}}}\n", e.to_string()));
            let _ = stderr.write_all(report.as_bytes());
            e.exit_code()
        }
    }
}
