//! The `lprisk` command line.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::econometrics::{
    find_suite, run_suite, DeltaMap, NumericPanel, RiskMeasure, VariableTransform, CONTROL_COLUMNS, SUITE_IDS,
};
use crate::ingest::{
    mainstream_assets, parse_asset_list, parse_events, parse_factor_panel, parse_hack_calendar,
    bundled_hack_calendar, write_events, write_factor_panel, EventFormat, IngestError,
};
use crate::ledger::{replay, ReplayMode};
use crate::manifest::{FileDigest, RunManifest};
use crate::metrics::{build_daily_panel, read_panel_csv, render_stats_markdown, write_panel_csv};
use crate::simgen::{generate, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "lprisk", version, about = "Liquidity-risk analytics for pool-based lending protocols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate event logs and list every problem found
    IngestCheck(IngestCheckArgs),
    /// Replay an event log into a daily panel and descriptive statistics
    Metrics(MetricsArgs),
    /// Fit preset regression suites on a daily panel and a factor panel
    Regress(RegressArgs),
    /// Generate a synthetic event log and factor panel from a scenario file
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct IngestCheckArgs {
    /// Event logs (.csv, or .jsonl/.ndjson)
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Fail on any diagnostic and replay the ledger without clamping
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Event log (.csv, or .jsonl/.ndjson)
    #[arg(long)]
    pub events: PathBuf,
    /// File listing asset symbols to keep, one per line
    #[arg(long, conflicts_with = "mainstream")]
    pub assets: Option<PathBuf>,
    /// Keep only the bundled 16-symbol mainstream asset list
    #[arg(long)]
    pub mainstream: bool,
    /// Reject malformed rows and ledger violations instead of skipping or clamping
    #[arg(long)]
    pub strict: bool,
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Eq10,
    Eq11,
    Eq12,
    Eq13,
    Eq14,
    Eq15,
    Eq16,
    Eq17,
    All,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    /// Daily panel CSV written by `metrics`
    #[arg(long)]
    pub panel: PathBuf,
    /// Protocol factor panel CSV
    #[arg(long)]
    pub factors: PathBuf,
    /// Daily panel whose loan, deposit and liquidation columns replace the main panel's
    #[arg(long)]
    pub control_panel: Option<PathBuf>,
    /// Suites to fit (repeatable)
    #[arg(long, value_enum, required = true)]
    pub suite: Vec<SuiteArg>,
    /// Fit variables in their original units
    #[arg(long, conflicts_with = "standardize")]
    pub raw: bool,
    /// Z-score the dependent and non-dummy regressors (default)
    #[arg(long)]
    pub standardize: bool,
    /// TOML table mapping variables to first_diff or pct_change
    #[arg(long)]
    pub delta_map: Option<PathBuf>,
    /// Hack calendar CSV (date,protocol); defaults to the bundled calendar
    #[arg(long)]
    pub hacks: Option<PathBuf>,
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario TOML file
    #[arg(long)]
    pub config: PathBuf,
    /// Override the scenario seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Event log format
    #[arg(long, value_enum, default_value = "csv")]
    pub format: LogFormat,
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
}

fn read_input(path: &Path) -> Result<(Vec<u8>, FileDigest)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let digest = FileDigest::of(path, &bytes);
    Ok((bytes, digest))
}

/// Writes each artifact into `out`, then a manifest listing them.
fn write_outputs(out: &Path, mut manifest: RunManifest, files: Vec<(&str, Vec<u8>)>) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (name, bytes) in files {
        let path = out.join(name);
        fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        manifest.outputs.push(FileDigest::of(&path, &bytes));
    }
    let path = out.join("manifest.json");
    fs::write(&path, manifest.to_json()).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn mode(strict: bool) -> ReplayMode {
    if strict {
        ReplayMode::Strict
    } else {
        ReplayMode::Lenient
    }
}

pub fn cmd_ingest_check(args: &IngestCheckArgs, out: &mut dyn Write) -> Result<bool> {
    let mode = mode(args.strict);
    let mut total = 0usize;
    for path in &args.paths {
        let (bytes, _) = read_input(path)?;
        let parsed = match parse_events(&bytes[..], EventFormat::from_path(path), ReplayMode::Lenient) {
            Ok(p) => p,
            Err(IngestError::Strict(d)) => unreachable!("lenient parse returned {} strict diagnostics", d.len()),
            Err(e) => return Err(e).with_context(|| path.display().to_string()),
        };
        let mut diags: Vec<String> = parsed.diagnostics.iter().map(ToString::to_string).collect();
        let mut warnings = 0;
        if let Some(i) = parsed.first_out_of_order {
            diags.push(format!("line {}: timestamp: earlier than the previous event", parsed.lines[i]));
        } else if !args.strict || diags.is_empty() {
            match replay(&parsed.events, mode) {
                Ok(r) => warnings = r.warnings.len(),
                Err(e) => diags.push(e.with_lines(&parsed.lines).to_string()),
            }
        }
        writeln!(out, "{}: {} events, {} diagnostic(s)", path.display(), parsed.events.len(), diags.len())?;
        for d in &diags {
            writeln!(out, "  {d}")?;
        }
        if warnings > 0 {
            writeln!(out, "  {warnings} ledger clamp warning(s)")?;
        }
        total += diags.len();
    }
    writeln!(out, "{total} diagnostics")?;
    Ok(!(args.strict && total > 0))
}

pub fn cmd_metrics(args: &MetricsArgs, out: &mut dyn Write) -> Result<()> {
    let (bytes, digest) = read_input(&args.events)?;
    let mode = mode(args.strict);
    let mut inputs = vec![digest];
    let mut flags = BTreeMap::from([("strict".to_string(), args.strict.to_string())]);
    let filter: Option<BTreeSet<String>> = if args.mainstream {
        flags.insert("assets".into(), "mainstream".into());
        Some(mainstream_assets())
    } else if let Some(path) = &args.assets {
        let (list, d) = read_input(path)?;
        inputs.push(d);
        let list = parse_asset_list(&String::from_utf8(list).context("asset list is not UTF-8")?);
        if list.is_empty() {
            bail!("asset list {} is empty", path.display());
        }
        Some(list)
    } else {
        None
    };
    let parsed = parse_events(&bytes[..], EventFormat::from_path(&args.events), mode)
        .with_context(|| args.events.display().to_string())?;
    for d in &parsed.diagnostics {
        eprintln!("warning: {}: {d}", args.events.display());
    }
    if parsed.events.is_empty() {
        bail!("no events in {}", args.events.display());
    }
    let rows = build_daily_panel(&parsed.events, filter.as_ref(), mode).map_err(|e| match e {
        crate::metrics::MetricsError::Replay(r) => anyhow::Error::new(r.with_lines(&parsed.lines)),
        other => anyhow::Error::new(other),
    })?;
    let negative = rows.iter().filter(|r| r.has_negative_liquidity()).count();
    if negative > 0 {
        eprintln!("warning: {negative} day(s) with negative protocol liquidity");
    }
    let manifest = RunManifest::new("metrics", inputs, flags, vec![]);
    let mut panel = Vec::new();
    write_panel_csv(&rows, &mut panel)?;
    let stats = render_stats_markdown(&rows, Some(&manifest.footer()));
    write_outputs(&args.out, manifest, vec![("daily_panel.csv", panel), ("stats.md", stats.into_bytes())])?;
    writeln!(out, "{} days written to {}", rows.len(), args.out.display())?;
    Ok(())
}

pub fn cmd_regress(args: &RegressArgs, out: &mut dyn Write) -> Result<()> {
    let standardize = !args.raw;
    let suites: Vec<&str> = if args.suite.contains(&SuiteArg::All) {
        SUITE_IDS.to_vec()
    } else {
        let mut ids: Vec<&str> = args
            .suite
            .iter()
            .map(|s| SUITE_IDS[*s as usize])
            .collect();
        ids.dedup();
        ids
    };
    let (panel_bytes, panel_digest) = read_input(&args.panel)?;
    let (factor_bytes, factor_digest) = read_input(&args.factors)?;
    let mut inputs = vec![panel_digest, factor_digest];
    let daily = read_panel_csv(&panel_bytes[..]).with_context(|| args.panel.display().to_string())?;
    let factors = parse_factor_panel(&factor_bytes[..]).with_context(|| args.factors.display().to_string())?;
    let mut merged = NumericPanel::from_daily_rows(&daily)?.merge(&NumericPanel::from_factor_rows(&factors)?)?;
    if let Some(path) = &args.control_panel {
        let (bytes, d) = read_input(path)?;
        inputs.push(d);
        let controls = read_panel_csv(&bytes[..]).with_context(|| path.display().to_string())?;
        merged.override_columns(&NumericPanel::from_daily_rows(&controls)?, &CONTROL_COLUMNS)?;
    }
    let delta = match &args.delta_map {
        Some(path) => {
            let (bytes, d) = read_input(path)?;
            inputs.push(d);
            DeltaMap::from_toml(&String::from_utf8(bytes).context("delta map is not UTF-8")?)?
        }
        None => DeltaMap::default(),
    };
    let hack_dates: Vec<NaiveDate> = match &args.hacks {
        Some(path) => {
            let (bytes, d) = read_input(path)?;
            inputs.push(d);
            parse_hack_calendar(&bytes[..]).with_context(|| path.display().to_string())?
        }
        None => bundled_hack_calendar(),
    }
    .into_iter()
    .map(|h| h.date)
    .collect();

    let mut flags = BTreeMap::from([
        ("standardize".to_string(), standardize.to_string()),
        ("suites".to_string(), suites.join(",")),
    ]);
    for (name, step) in delta.iter() {
        flags.insert(format!("delta.{name}"), VariableTransform::step(step).to_string());
    }
    let manifest = RunManifest::new("regress", inputs, flags, vec![]);
    let mut files = Vec::new();
    for id in &suites {
        let suite = find_suite(id)?;
        let k = suite.regressors(RiskMeasure::Liquidity, &delta).len();
        if merged.len() < k + 2 {
            bail!("merged panel has {} rows; {id} needs at least {}", merged.len(), k + 2);
        }
        let report = run_suite(&suite, &merged, &delta, standardize, &hack_dates)?;
        let mut footer = manifest.footer();
        if suite.mainstream {
            footer = format!("Expects a daily panel built from the mainstream asset list. {footer}");
        }
        files.push((format!("{id}.md"), report.to_markdown(Some(&footer)).into_bytes()));
        files.push((format!("{id}.tsv"), report.to_tsv().into_bytes()));
        files.push((format!("{id}_deletions.tsv"), report.audit_tsv().into_bytes()));
        writeln!(out, "{id}: {} fits", report.fit_count())?;
    }
    let files = files.iter().map(|(n, b)| (n.as_str(), b.clone())).collect();
    write_outputs(&args.out, manifest, files)?;
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let (bytes, digest) = read_input(&args.config)?;
    let text = String::from_utf8(bytes).context("scenario file is not UTF-8")?;
    let mut cfg = ScenarioConfig::from_toml(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let scenario = generate(&cfg)?;
    let (name, format) = match args.format {
        LogFormat::Csv => ("events.csv", EventFormat::Csv),
        LogFormat::Jsonl => ("events.jsonl", EventFormat::Jsonl),
    };
    let mut events = Vec::new();
    write_events(&scenario.events, format, &mut events)?;
    let mut factors = Vec::new();
    write_factor_panel(&scenario.factors, &mut factors)?;
    let flags = BTreeMap::from([("format".to_string(), name.to_string())]);
    let manifest = RunManifest::new("simulate", vec![digest], flags, vec![cfg.seed]);
    write_outputs(&args.out, manifest, vec![(name, events), ("factors.csv", factors)])?;
    writeln!(
        out,
        "{} events over {} days written to {}",
        scenario.events.len(),
        scenario.factors.len(),
        args.out.display()
    )?;
    Ok(())
}

fn report_error(err: &anyhow::Error) {
    let color = std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stderr().is_terminal();
    let label = if color { "\x1b[1;31merror\x1b[0m" } else { "error" };
    eprintln!("{label}: {err}");
    for cause in err.chain().skip(1) {
        eprintln!("  caused by: {cause}");
    }
}

/// Runs the CLI: 0 on success, 1 on domain errors, 2 on usage errors.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
    let cmd = <Cli as clap::CommandFactory>::command().color(if no_color {
        clap::ColorChoice::Never
    } else {
        clap::ColorChoice::Auto
    });
    let cli = match cmd.try_get_matches_from(args).and_then(|m| <Cli as clap::FromArgMatches>::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut stdout = std::io::stdout().lock();
    let result = match &cli.command {
        Command::IngestCheck(a) => cmd_ingest_check(a, &mut stdout),
        Command::Metrics(a) => cmd_metrics(a, &mut stdout).map(|_| true),
        Command::Regress(a) => cmd_regress(a, &mut stdout).map(|_| true),
        Command::Simulate(a) => cmd_simulate(a, &mut stdout).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            report_error(&e);
            ExitCode::from(1)
        }
    }
}
