//! The `openness` command line.
//!
//! Exit codes: 0 on success, 1 when the arguments do not parse, 2 when the
//! data cannot be loaded or analyzed.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use super::{analyze, emit_charts, emit_csv, emit_json, AnalysisOptions, Metric};
use crate::ingest::remote::{FetchConfig, Fetcher, TOKEN_ENV};
use crate::ingest::{load_ghtorrent_dump, load_ndjson, EventStore, ParseMode};
use crate::roles::RoleOptions;

/// Overrides the API root used by `--format remote`.
pub const API_URL_ENV: &str = "OPENNESS_API_URL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "openness", version, about = "Project-openness metrics for repository event data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a dataset, compute the metrics and write reports.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Ndjson,
    Ghtorrent,
    Remote,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    M1,
    M2,
    M3,
    All,
}

#[derive(Debug, clap::Args)]
struct AnalyzeArgs {
    /// NDJSON file, dump directory, or owner/name for remote input.
    #[arg(long)]
    input: String,
    #[arg(long, value_enum)]
    format: InputFormat,
    /// API token for remote input (falls back to $OPENNESS_TOKEN).
    #[arg(long)]
    token: Option<String>,
    /// Metrics to compute; repeat or comma-separate.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    metric: Vec<MetricArg>,
    /// Report on a single original project (owner/name).
    #[arg(long)]
    project: Option<String>,
    /// JSON destination; `-` is standard output.
    #[arg(long, default_value = "-")]
    out: String,
    /// Directory for SVG charts and index.html.
    #[arg(long)]
    charts: Option<PathBuf>,
    /// Directory for CSV tables.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Abort on the first malformed or unresolved record.
    #[arg(long)]
    strict: bool,
    /// Average acceptance and latency over all pull requests instead of per project.
    #[arg(long)]
    pooled: bool,
    /// Judge authors by their role at the time each pull request was opened.
    #[arg(long)]
    role_at_pr_time: bool,
    /// Count closing one's own issue or pull request as a management action.
    #[arg(long)]
    strict_management: bool,
}

fn metrics(args: &[MetricArg]) -> Vec<Metric> {
    let mut out = Vec::new();
    for m in args {
        match m {
            MetricArg::All => out.extend(Metric::ALL),
            MetricArg::M1 => out.push(Metric::M1),
            MetricArg::M2 => out.push(Metric::M2),
            MetricArg::M3 => out.push(Metric::M3),
        }
    }
    out.sort();
    out.dedup();
    out
}

fn source_date_epoch() -> Result<Option<DateTime<Utc>>, String> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(raw) if !raw.trim().is_empty() => raw
            .trim()
            .parse::<i64>()
            .ok()
            .and_then(|s| DateTime::from_timestamp(s, 0))
            .map(Some)
            .ok_or_else(|| format!("SOURCE_DATE_EPOCH is not a Unix timestamp: {raw:?}")),
        _ => Ok(None),
    }
}

fn load(args: &AnalyzeArgs) -> Result<EventStore, String> {
    let mode = if args.strict { ParseMode::Strict } else { ParseMode::Lenient };
    match args.format {
        InputFormat::Ndjson => load_ndjson(&args.input, mode).map_err(|e| e.to_string()),
        InputFormat::Ghtorrent => load_ghtorrent_dump(&args.input, mode).map_err(|e| e.to_string()),
        InputFormat::Remote => {
            let mut config = FetchConfig {
                token: args
                    .token
                    .clone()
                    .or_else(|| std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty())),
                mode,
                ..FetchConfig::default()
            };
            if let Ok(url) = std::env::var(API_URL_ENV) {
                if !url.is_empty() {
                    config.base_url = url;
                }
            }
            Fetcher::http(config).fetch(&args.input).map_err(|e| e.to_string())
        }
    }
}

fn run_analyze(args: AnalyzeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), String> {
    let store = load(&args)?;
    for d in store.diagnostics() {
        log::warn!("{}: {}", d.location, d.message);
    }
    if !store.diagnostics().is_empty() {
        let _ = writeln!(stderr, "openness: {} record(s) produced diagnostics", store.diagnostics().len());
    }

    let options = AnalysisOptions {
        metrics: metrics(&args.metric),
        roles: RoleOptions {
            strict_management: args.strict_management,
        },
        role_at_pr_time: args.role_at_pr_time,
        pooled: args.pooled,
        project: args.project.clone(),
        generated_at: source_date_epoch()?,
    };
    let report = analyze(&store, &options).map_err(|e| e.to_string())?;

    let write_json = |dest: &mut dyn Write| -> io::Result<usize> {
        match &args.project {
            Some(name) => match report.per_project.first() {
                Some(project) => emit_json(project, dest),
                None => Err(io::Error::other(format!("project {name:?} has no classified users"))),
            },
            None => emit_json(&report, dest),
        }
    };
    if args.out == "-" {
        write_json(stdout).map_err(|e| e.to_string())?;
    } else {
        let file = File::create(&args.out).map_err(|e| format!("cannot create {}: {e}", args.out))?;
        let mut w = BufWriter::new(file);
        write_json(&mut w).map_err(|e| format!("{}: {e}", args.out))?;
    }
    if let Some(dir) = &args.csv {
        emit_csv(&report, dir).map_err(|e| e.to_string())?;
    }
    if let Some(dir) = &args.charts {
        emit_charts(&report, dir).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn usage() -> String {
    let mut command = Cli::command();
    command.build();
    command
        .find_subcommand_mut("analyze")
        .map(|c| c.render_help().to_string())
        .unwrap_or_default()
}

/// Runs the command line with explicit output streams and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                {
                    let _ = writeln!(stderr, "\n{}", usage());
                }
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{rendered}");
                EXIT_OK
            };
        }
    };
    match cli.command {
        Command::Analyze(args) => match run_analyze(args, stdout, stderr) {
            Ok(()) => EXIT_OK,
            Err(message) => {
                let _ = writeln!(stderr, "openness: error: {message}");
                EXIT_DATA
            }
        },
    }
}

/// Entry point used by the `openness` binary.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).try_init();
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_captured(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_metric_is_a_usage_error() {
        let (code, _, err) =
            run_captured(&["openness", "analyze", "--input", "x", "--format", "ndjson", "--metric", "m9"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("Usage"), "{err}");
    }

    #[test]
    fn missing_file_is_a_data_error() {
        let (code, _, err) =
            run_captured(&["openness", "analyze", "--input", "/nonexistent/x.ndjson", "--format", "ndjson"]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.contains("file not found"), "{err}");
    }

    #[test]
    fn metric_list_expands() {
        assert_eq!(metrics(&[MetricArg::M3, MetricArg::M1, MetricArg::M3]), vec![Metric::M1, Metric::M3]);
        assert_eq!(metrics(&[MetricArg::All]), Metric::ALL.to_vec());
    }
}
