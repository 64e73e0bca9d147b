//! Command-line front end for `waring-core`.
//!
//! Subcommands: `certify`, `monodromy`, `table`, `replay-theorem`.
//! Exit codes: 0 success, 1 comparison mismatch, 2 configuration or input
//! error, 3 numerical failure.

pub mod certify;
pub mod config;
pub mod monodromy;
pub mod table;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use waring_core::ProblemSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<waring_core::Error> for CliError {
    fn from(e: waring_core::Error) -> Self {
        match e {
            waring_core::Error::Singular { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "waring", version, about = "Simultaneous Waring decompositions and identifiability certificates")]
pub struct Cli {
    /// File of `key = value` lines using the long flag names; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hessian identifiability criterion (descent from g-1, or a single k).
    Certify(certify::CertifyArgs),
    /// Monodromy enumeration of decompositions in a perfect case.
    Monodromy(monodromy::MonodromyArgs),
    /// Compare certify results against a table of expected ranks.
    Table(table::TableArgs),
    /// Re-run monodromy from a fixture start point and compare with reference solutions.
    ReplayTheorem(monodromy::ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Human,
    Json,
    Csv,
}

/// `--n --r --degrees` shared by `certify` and `monodromy`.
#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub r: usize,
    /// Comma-separated, nondecreasing.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub degrees: Vec<usize>,
}

impl SpecArgs {
    pub fn to_spec(&self) -> Result<ProblemSpec, CliError> {
        if self.degrees.len() != self.r {
            return Err(CliError::Config(format!(
                "--r {} but {} degrees given",
                self.r,
                self.degrees.len()
            )));
        }
        Ok(ProblemSpec::new(self.n, self.degrees.clone())?)
    }
}

/// What a subcommand produced: text for the terminal, an optional JSON
/// document, and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub human: String,
    pub json: String,
    pub csv: Option<String>,
    pub exit_code: i32,
}

impl Outcome {
    pub fn render(&self, format: OutputFormat) -> &str {
        match format {
            OutputFormat::Human => &self.human,
            OutputFormat::Json => &self.json,
            OutputFormat::Csv => self.csv.as_deref().unwrap_or(&self.human),
        }
    }
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn write_json(path: &Option<PathBuf>, outcome: &Outcome) -> Result<(), CliError> {
    if let Some(p) = path {
        std::fs::write(p, &outcome.json).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code. Output goes to stdout/stderr.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let args = match config::merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (result, format, json_path) = match &cli.command {
        Command::Certify(a) => (certify::cmd_certify(a), a.format, a.json.clone()),
        Command::Monodromy(a) => (monodromy::cmd_monodromy(a), a.format, a.json.clone()),
        Command::Table(a) => (table::cmd_table(a), a.format, a.json.clone()),
        Command::ReplayTheorem(a) => (monodromy::cmd_replay_theorem(a), a.format, a.json.clone()),
    };
    match result.and_then(|o| write_json(&json_path, &o).map(|_| o)) {
        Ok(outcome) => {
            print!("{}", outcome.render(format));
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
