use crate::certify::certify_options;
use crate::{to_json, CliError, Outcome, OutputFormat, EXIT_MISMATCH, EXIT_OK};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write;
use std::path::PathBuf;
use waring_core::{certify_descend, CertifyOptions, ProblemSpec};

const SMALL: &str = include_str!("../fixtures/table_small.csv");
const ACCEPTANCE: &str = include_str!("../fixtures/table_acceptance.csv");
const FULL: &str = include_str!("../fixtures/table_full.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subset {
    /// Binary rows with N ≤ 60.
    Small,
    /// The fourteen rows checked by the acceptance suite.
    Acceptance,
    /// Every bundled row.
    Full,
}

impl Subset {
    pub fn csv(self) -> &'static str {
        match self {
            Subset::Small => SMALL,
            Subset::Acceptance => ACCEPTANCE,
            Subset::Full => FULL,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// CSV with header `r,n,degrees,expected_g,expected_k,mark`; degrees separated by `|`.
    #[arg(long, conflicts_with = "subset")]
    pub input: Option<PathBuf>,
    /// Bundled table to run when no --input is given.
    #[arg(long, value_enum, default_value_t = Subset::Small)]
    pub subset: Subset,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub prime: Option<u64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
}

#[derive(Debug, Deserialize)]
struct RawRow {
    r: usize,
    n: usize,
    degrees: String,
    expected_g: usize,
    expected_k: usize,
    #[serde(default)]
    mark: Option<String>,
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub spec: ProblemSpec,
    pub expected_g: usize,
    pub expected_k: usize,
    pub mark: String,
}

pub fn parse_table(text: &str) -> Result<Vec<TableRow>, CliError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.deserialize::<RawRow>().enumerate() {
        let line = i + 2;
        let raw = rec.map_err(|e| CliError::Config(format!("table line {line}: {e}")))?;
        let degrees = raw
            .degrees
            .split('|')
            .map(|d| d.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("table line {line}: bad degree list {:?}: {e}", raw.degrees)))?;
        if degrees.len() != raw.r {
            return Err(CliError::Config(format!(
                "table line {line}: r = {} but {} degrees",
                raw.r,
                degrees.len()
            )));
        }
        let spec = ProblemSpec::new(raw.n, degrees).map_err(|e| CliError::Config(format!("table line {line}: {e}")))?;
        rows.push(TableRow {
            spec,
            expected_g: raw.expected_g,
            expected_k: raw.expected_k,
            mark: raw.mark.unwrap_or_default(),
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct RowResult {
    pub spec: ProblemSpec,
    pub mark: String,
    pub expected_g: usize,
    pub g: usize,
    pub g_match: bool,
    pub expected_k: usize,
    pub k: Option<usize>,
    pub k_match: bool,
    /// Rank levels whose verdict was re-checked with the second prime.
    pub retried_levels: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub schema_version: u32,
    pub seed: u64,
    pub rows: Vec<RowResult>,
    pub k_mismatches: usize,
    pub g_mismatches: usize,
}

pub fn check_row(row: &TableRow, seed: u64, opts: &CertifyOptions) -> Result<RowResult, CliError> {
    let run = certify_descend(&row.spec, seed, opts)?;
    Ok(RowResult {
        spec: row.spec.clone(),
        mark: row.mark.clone(),
        expected_g: row.expected_g,
        g: run.generic_rank,
        g_match: run.generic_rank == row.expected_g,
        expected_k: row.expected_k,
        k: run.max_certified,
        k_match: run.max_certified == Some(row.expected_k),
        retried_levels: run.trace.iter().filter(|s| s.retries > 0).count(),
    })
}

/// Runs every row; the order of `rows` is kept in the report.
pub fn run_table(rows: &[TableRow], seed: u64, opts: &CertifyOptions, jobs: Option<usize>) -> Result<TableReport, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let results: Vec<RowResult> =
        pool.install(|| rows.par_iter().map(|r| check_row(r, seed, opts)).collect::<Result<_, _>>())?;
    Ok(TableReport {
        schema_version: waring_core::SCHEMA_VERSION,
        seed,
        k_mismatches: results.iter().filter(|r| !r.k_match).count(),
        g_mismatches: results.iter().filter(|r| !r.g_match).count(),
        rows: results,
    })
}

fn degrees_str(spec: &ProblemSpec) -> String {
    spec.degrees().iter().map(|d| d.to_string()).collect::<Vec<_>>().join("|")
}

pub fn cmd_table(args: &TableArgs) -> Result<Outcome, CliError> {
    let text = match &args.input {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => args.subset.csv().to_string(),
    };
    let rows = parse_table(&text)?;
    let opts = certify_options(args.prime)?;
    let report = run_table(&rows, args.seed, &opts, args.jobs)?;

    let mut human = String::new();
    let mut csv = String::from("r,n,degrees,mark,expected_g,g,expected_k,k,k_match,g_match\n");
    for r in &report.rows {
        let k = r.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
        writeln!(
            human,
            "{:<5} {:<28} g {:>4}{}  k {:>4} expected {:>4}  {}",
            if r.k_match { "ok" } else { "FAIL" },
            r.spec.to_string(),
            r.g,
            if r.g_match { "  ".to_string() } else { format!(" (table g {})", r.expected_g) },
            k,
            r.expected_k,
            r.mark
        )
        .unwrap();
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            r.spec.r(),
            r.spec.n(),
            degrees_str(&r.spec),
            r.mark,
            r.expected_g,
            r.g,
            r.expected_k,
            k,
            r.k_match,
            r.g_match
        )
        .unwrap();
    }
    writeln!(
        human,
        "{} rows: {} k mismatches, {} g mismatches",
        report.rows.len(),
        report.k_mismatches,
        report.g_mismatches
    )
    .unwrap();
    Ok(Outcome {
        human,
        json: to_json(&report),
        csv: Some(csv),
        exit_code: if report.k_mismatches > 0 { EXIT_MISMATCH } else { EXIT_OK },
    })
}
