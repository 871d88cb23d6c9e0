use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Story-grammar coding of diary records.
///
/// Exit status: 0 on success, 1 on a usage error (bad flag, unknown category
/// path, malformed filter), 2 on a data error (unreadable or invalid input).
/// Category paths are '/'-joined category names below the root, e.g.
/// "Internal Politics/Political Organizations/Goverment".
#[derive(Debug, Parser)]
#[command(name = "diario", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a delimited diary file into a records file (NDJSON).
    Ingest(IngestArgs),
    /// Extract actors, classify, enrich and store coded events.
    Code(CodeArgs),
    /// Human review service.
    #[command(subcommand)]
    Review(ReviewCommand),
    /// Print events matching every filter clause.
    Query(QueryArgs),
    /// Aggregate the store into a CSV table.
    Analyze(AnalyzeArgs),
    /// Write a KML, DOT or SVG artifact.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DateOrderArg {
    /// month/day/year
    Md,
    /// day/month/year
    Dm,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Field delimiter: a single character, or tab, comma, semicolon, pipe.
    #[arg(long, default_value = "tab")]
    pub format: String,
    #[arg(long, value_enum, default_value = "md")]
    pub date_order: DateOrderArg,
    /// Fields may be double-quoted (RFC 4180, single-line).
    #[arg(long)]
    pub quoted: bool,
    /// Two-digit years below this (mod 100) belong to the next century.
    #[arg(long, default_value_t = 1970)]
    pub pivot_year: i32,
    /// Records file to write, one JSON record per line.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub kb: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Store directory; its contents are replaced.
    #[arg(long)]
    pub store: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ReviewCommand {
    /// Serve the review API (and UI assets) on localhost.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Shared secret required in the X-Review-Token header.
    #[arg(long)]
    pub token: Option<String>,
    /// Directory of built review UI assets served at /.
    #[arg(long)]
    pub ui: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum QueryFormat {
    /// Columns: record_id, ordinal, status, kind, then one per schema category.
    Csv,
    /// One event per line.
    Ndjson,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub store: PathBuf,
    /// Clause, repeatable: path=value, path~=a|b, path@YYYY-MM-DD..YYYY-MM-DD or path?
    #[arg(long)]
    pub filter: Vec<String>,
    #[arg(long, value_enum, default_value = "ndjson")]
    pub format: QueryFormat,
    /// Keep events a verifier rejected.
    #[arg(long)]
    pub include_rejected: bool,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Analysis {
    /// Columns: one per --group-by path, count.
    Freq,
    /// Columns: government, extra --group-by paths, count, normalized.
    Norm,
    /// Rows by the first --group-by path, columns by the second, with totals.
    Crosstab,
    /// Columns: source, target, weight.
    Network,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnitArg {
    Days,
    Weeks,
    Months,
    Years,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(value_enum)]
    pub analysis: Analysis,
    #[arg(long)]
    pub store: PathBuf,
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long)]
    pub out: PathBuf,
}

/// Options shared by analyses and exports.
#[derive(Debug, Args)]
pub struct ShapeArgs {
    /// Grouping path, repeatable.
    #[arg(long = "group-by")]
    pub group_by: Vec<String>,
    /// Network node prefix, repeatable; earlier prefixes win. Defaults to the
    /// four power-branch containers.
    #[arg(long = "depth-prefix")]
    pub depth_prefix: Vec<String>,
    /// Pre-filter clause, repeatable (same syntax as query).
    #[arg(long)]
    pub filter: Vec<String>,
    /// Knowledge base; required for normalisation and KML.
    #[arg(long)]
    pub kb: Option<PathBuf>,
    /// Time unit for normalised counts.
    #[arg(long, value_enum, default_value = "days")]
    pub unit: UnitArg,
    /// Drop events without a government instead of failing.
    #[arg(long)]
    pub skip_unset: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Artifact {
    /// Placemarks for located events; unlocated ones reported on stderr.
    Kml,
    /// Meeting network as an undirected Graphviz graph.
    Dot,
    /// Histogram of counts (or normalised counts with --normalize).
    Svg,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(value_enum)]
    pub artifact: Artifact,
    #[arg(long)]
    pub store: PathBuf,
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Bar heights from government-duration-normalised counts.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value = "")]
    pub title: String,
    #[arg(long)]
    pub out: PathBuf,
}
