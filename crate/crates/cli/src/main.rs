use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use pitchrater::config::{Settings, KEYS};
use pitchrater::data::{self, Parsed};
use pitchrater::evaluate::{
    walk_forward_many, write_aggregates_csv, write_rows_csv, ForecasterKind, ModelSummary, Pipeline, Summary,
};
use pitchrater::features::{build_feature_matrix, write_feature_csv, FeatureConfig};
use pitchrater::ratings::{rating_timeline, write_timeline_csv};
use pitchrater::simulate::{gen_league, write_truth_csv};
use pitchrater::Error;

const EXIT_FATAL: u8 = 1;
const EXIT_FINDINGS: u8 = 2;
const EXIT_USAGE: u8 = 64;

const CONFIG_ECHO: &str = "config.txt";
const SUMMARY: &str = "summary.json";

#[derive(Parser, Debug)]
#[command(name = "pitchrater", version, about = "Soccer rating systems, match forecasts and walk-forward backtests")]
struct Cli {
    /// Config file of `key = value` lines (see `pitchrater keys`)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one config key; repeatable, applied after --config
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Oisdb,
    Footballdata,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a source CSV into a canonical dataset file
    Ingest {
        /// Source CSV
        #[arg(long)]
        input: PathBuf,
        /// Source schema
        #[arg(long, value_enum)]
        format: Format,
        /// Canonical dataset to write
        #[arg(long)]
        output: PathBuf,
    },
    /// Replay a dataset through a rating engine and export timelines
    Rate {
        /// Canonical dataset
        #[arg(long)]
        input: PathBuf,
        /// Output directory
        #[arg(long)]
        output: PathBuf,
        /// Rating engine (shorthand for --set engine=...)
        #[arg(long)]
        engine: Option<String>,
        /// Also write the pre-match feature matrix
        #[arg(long)]
        features: bool,
    },
    /// Walk-forward backtest of a pipeline against the baselines
    Backtest {
        /// Canonical dataset
        #[arg(long)]
        input: PathBuf,
        /// Output directory
        #[arg(long)]
        output: PathBuf,
        /// Rating engine (shorthand for --set engine=...)
        #[arg(long)]
        engine: Option<String>,
        /// Forecaster (shorthand for --set forecaster=...)
        #[arg(long)]
        forecaster: Option<String>,
    },
    /// Generate a synthetic league with known team strengths
    Simulate {
        /// Output directory
        #[arg(long)]
        output: PathBuf,
        /// Random seed (shorthand for --set seed=...)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the metrics table stored in a backtest output directory
    Report {
        /// Backtest output directory
        #[arg(long)]
        input: PathBuf,
    },
    /// List every config key with its default
    Keys,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(Error::Config(_)) => EXIT_USAGE,
            _ => EXIT_FATAL,
        };
        Self { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: anyhow!("{msg}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn settings(cli: &Cli, extra: &[(&str, Option<String>)]) -> Result<Settings, Failure> {
    let mut s = Settings::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        s.apply_text(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    for pair in &cli.set {
        s.set_pair(pair).map_err(usage)?;
    }
    for (k, v) in extra {
        if let Some(v) = v {
            s.set(k, v).map_err(usage)?;
        }
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Ingest { input, format, output } => {
            // Parsed only to reject bad --config/--set early.
            settings(&cli, &[])?;
            ingest(input, *format, output)
        }
        Command::Rate { input, output, engine, features } => {
            let s = settings(&cli, &[("engine", engine.clone())])?;
            rate(&s, input, output, *features)
        }
        Command::Backtest { input, output, engine, forecaster } => {
            let s = settings(&cli, &[("engine", engine.clone()), ("forecaster", forecaster.clone())])?;
            backtest(&s, input, output)
        }
        Command::Simulate { output, seed } => {
            let s = settings(&cli, &[("seed", seed.map(|v| v.to_string()))])?;
            simulate(&s, output)
        }
        Command::Report { input } => report(input),
        Command::Keys => {
            settings(&cli, &[])?;
            for (k, v, doc) in KEYS {
                println!("{k:<24} {v:<8} {doc}");
            }
            println!("{:<24} {:<8} base K for importance LABEL", "elo.importance.LABEL", "");
            Ok(0)
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn prepare_dir(dir: &Path, s: &Settings) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_atomic(&dir.join(CONFIG_ECHO), &s.to_string())
}

fn read_dataset(path: &Path) -> Result<pitchrater::Dataset, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ds = data::read_canonical(&text).with_context(|| format!("loading {}", path.display()))?;
    if ds.is_empty() {
        return Err(anyhow!("{} contains no matches", path.display()).into());
    }
    Ok(data::canonical_sort(ds))
}

fn ingest(input: &Path, format: Format, output: &Path) -> Result<u8, Failure> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let parsed: Parsed = match format {
        Format::Oisdb => data::parse_oisdb_lenient(&text),
        Format::Footballdata => data::parse_footballdata_lenient(&text),
    }
    .with_context(|| format!("parsing {}", input.display()))?;
    let dataset = data::canonical_sort(parsed.dataset);
    let report = data::validate(&dataset);
    write_atomic(output, &data::write_canonical(&dataset)?)?;

    println!("{} matches written to {}", dataset.len(), output.display());
    if !parsed.unmapped_columns.is_empty() {
        println!("{} unmapped columns ignored: {}", parsed.unmapped_columns.len(), parsed.unmapped_columns.join(", "));
    }
    println!(
        "validation: {} result/goal mismatches, {} duplicate fixtures, {} date gaps, {} self-play, {} invalid odds",
        report.result_goal_mismatch, report.duplicate_fixtures, report.date_gaps, report.self_play, report.invalid_odds
    );
    for f in &parsed.findings {
        println!("finding: line {}: {}", f.line, f.message);
    }
    for d in &report.details {
        println!("finding: {d}");
    }
    Ok(if parsed.findings.is_empty() && report.is_clean() { 0 } else { EXIT_FINDINGS })
}

fn rate(s: &Settings, input: &Path, output: &Path, features: bool) -> Result<u8, Failure> {
    let spec = s.engine()?;
    let dataset = read_dataset(input)?;
    prepare_dir(output, s)?;
    let mut engine = spec.build()?;
    let rows = rating_timeline(&dataset, engine.as_mut())?;
    write_atomic(&output.join("timeline.csv"), &write_timeline_csv(&rows)?)?;
    let mut teams = engine.teams();
    teams.sort_by(|a, b| {
        let (x, y) = (engine.strength(a).unwrap_or(0.0), engine.strength(b).unwrap_or(0.0));
        y.total_cmp(&x).then_with(|| a.cmp(b))
    });
    println!("{} matches rated with {}; final table:", dataset.len(), spec.name());
    for (i, t) in teams.iter().enumerate() {
        println!("{:>3} {:<28} {:>10.4}", i + 1, t, engine.strength(t).unwrap_or(0.0));
    }
    if features {
        let matrix = build_feature_matrix(&dataset, &FeatureConfig::default())?;
        write_atomic(&output.join("features.csv"), &write_feature_csv(&matrix)?)?;
    }
    Ok(0)
}

fn backtest(s: &Settings, input: &Path, output: &Path) -> Result<u8, Failure> {
    let model = s.pipeline()?;
    let folds = s.folds()?;
    let dataset = read_dataset(input)?;
    if model.forecaster == ForecasterKind::Odds && !dataset.has_odds() {
        return Err(anyhow!("the odds forecaster needs bookmaker odds, but {} has matches without them", input.display()).into());
    }

    let mut pipelines = vec![model.clone()];
    let mut baselines = vec![ForecasterKind::Uniform, ForecasterKind::Majority];
    if dataset.has_odds() {
        baselines.push(ForecasterKind::Odds);
    }
    for b in baselines {
        if b != model.forecaster {
            pipelines.push(Pipeline::new(model.engine.clone(), b));
        }
    }
    prepare_dir(output, s)?;
    let reports = walk_forward_many(&dataset, &pipelines, &folds)?;

    let rows: Vec<_> = reports.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    let aggregates: Vec<_> = reports.iter().flat_map(|r| r.aggregates.iter().cloned()).collect();
    write_atomic(&output.join("rows.csv"), &write_rows_csv(&rows)?)?;
    write_atomic(&output.join("aggregates.csv"), &write_aggregates_csv(&aggregates)?)?;

    let mut notes = reports[0].notes.clone();
    notes.extend(reports[0].folds.iter().map(|(_, fold, start)| format!("fold {fold} starts {start}")));
    let summary = Summary {
        models: reports.iter().filter_map(ModelSummary::from_report).collect(),
        notes,
    };
    if summary.models.is_empty() {
        return Err(anyhow!("no fold had prior training data; nothing was forecast").into());
    }
    write_atomic(&output.join(SUMMARY), &serde_json::to_string_pretty(&summary).context("encoding summary")?)?;
    print!("{}", summary.render_table());
    Ok(0)
}

fn simulate(s: &Settings, output: &Path) -> Result<u8, Failure> {
    let sim = s.sim_league()?;
    let (dataset, truth) = gen_league(&sim)?;
    prepare_dir(output, s)?;
    write_atomic(&output.join("dataset.csv"), &data::write_canonical(&dataset)?)?;
    write_atomic(&output.join("truth.csv"), &write_truth_csv(&truth)?)?;
    println!(
        "{} matches ({} teams, {} seasons, seed {}) written to {}",
        dataset.len(),
        sim.teams.len(),
        sim.seasons,
        sim.seed,
        output.display()
    );
    Ok(0)
}

fn report(input: &Path) -> Result<u8, Failure> {
    let path = input.join(SUMMARY);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let summary: Summary = serde_json::from_str(&text).with_context(|| format!("decoding {}", path.display()))?;
    print!("{}", summary.render_table());
    for n in &summary.notes {
        println!("note: {n}");
    }
    Ok(0)
}
