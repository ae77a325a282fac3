//! Regenerates the fixture outputs through the binary and checks them
//! against the stored goldens and the naive oracles.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use lprisk::econometrics::NumericPanel;
use lprisk::ingest::{parse_events, EventFormat};
use lprisk::ledger::{EventRecord, ReplayMode};
use lprisk::metrics::{describe_present, read_panel_csv, DailyPanelRow};

use super::{oracle_panel, ratio_f64, scaled, two_pass, USD_DP};

/// (subdirectory of the run output, file name)
pub const GOLDEN_FILES: [(&str, &str); 5] = [
    ("metrics", "daily_panel.csv"),
    ("metrics", "stats.md"),
    ("regress", "eq10.md"),
    ("regress", "eq10.tsv"),
    ("regress", "eq14.md"),
];

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn golden_dir() -> PathBuf {
    crate_dir().join("tests/golden")
}

pub fn fixture(name: &str) -> PathBuf {
    crate_dir().join("tests/fixtures").join(name)
}

fn run(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_lprisk"))
        .args(args)
        .current_dir(crate_dir())
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "lprisk {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Runs `metrics` and `regress eq10 eq14` on the fixtures into `dir`.
/// Inputs are passed relative to the crate so manifests do not embed temp paths.
pub fn regenerate(dir: &Path) {
    let m = dir.join("metrics");
    let r = dir.join("regress");
    run(&["metrics", "--events", "tests/fixtures/events.csv", "--out", m.to_str().unwrap()]);
    let panel = m.join("daily_panel.csv");
    run(&[
        "regress",
        "--panel",
        panel.to_str().unwrap(),
        "--factors",
        "tests/fixtures/factors.csv",
        "--suite",
        "eq10",
        "--suite",
        "eq14",
        "--out",
        r.to_str().unwrap(),
    ]);
}

/// Byte comparison of each golden file; returns (name, matches).
pub fn compare(dir: &Path) -> Vec<(String, bool)> {
    GOLDEN_FILES
        .iter()
        .map(|(sub, name)| {
            let fresh = fs::read(dir.join(sub).join(name)).unwrap_or_default();
            let stored = fs::read(golden_dir().join(name)).unwrap_or_default();
            (name.to_string(), !stored.is_empty() && fresh == stored)
        })
        .collect()
}

pub fn bless(dir: &Path) {
    fs::create_dir_all(golden_dir()).unwrap();
    for (sub, name) in GOLDEN_FILES {
        fs::copy(dir.join(sub).join(name), golden_dir().join(name)).unwrap();
    }
}

pub fn fixture_events() -> Vec<EventRecord> {
    let f = fs::File::open(fixture("events.csv")).unwrap();
    parse_events(f, EventFormat::Csv, ReplayMode::Strict).unwrap().events
}

pub fn golden_panel() -> Vec<DailyPanelRow> {
    read_panel_csv(fs::File::open(golden_dir().join("daily_panel.csv")).unwrap()).unwrap()
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= 1e-12,
        _ => false,
    }
}

/// The stored panel against the brute-force recomputation from the fixture log.
pub fn check_panel(rows: &[DailyPanelRow], events: &[EventRecord]) -> Result<(), String> {
    let oracle = oracle_panel(events);
    if rows.len() != oracle.len() {
        return Err(format!("{} rows, oracle has {}", rows.len(), oracle.len()));
    }
    let usd = |d: &lprisk::decimal::Decimal| scaled(&d.to_string(), USD_DP);
    for (r, o) in rows.iter().zip(&oracle) {
        let ok = r.date == o.date
            && usd(&r.liquidity_usd) == o.liquidity_usd
            && usd(&r.outstanding_loan_usd) == o.debt_usd
            && usd(&r.outstanding_deposit_usd) == o.deposit_usd
            && usd(&r.liquidation_usd) == o.liquidation_usd
            && usd(&r.loan_vol_usd) == o.loans.volume
            && usd(&r.new_loan_vol_usd) == o.loans.new_volume
            && usd(&r.deposit_vol_usd) == o.deposits.volume
            && usd(&r.new_deposit_vol_usd) == o.deposits.new_volume
            && r.borrower as usize == o.loans.actors
            && r.new_borrower as usize == o.loans.new_actors
            && r.depositor as usize == o.deposits.actors
            && r.new_depositor as usize == o.deposits.new_actors
            && close(r.utilization, ratio_f64(o.debt_usd, o.deposit_usd))
            && close(r.repeat_loan_ratio, o.loans.repeat_ratio())
            && close(r.repeat_deposit_ratio, o.deposits.repeat_ratio());
        if !ok {
            return Err(format!("day {} disagrees with the oracle", r.date));
        }
    }
    Ok(())
}

/// Every panel column's descriptive statistics against the two-pass route.
pub fn check_stats(rows: &[DailyPanelRow]) -> Result<(), String> {
    let panel = NumericPanel::from_daily_rows(rows).map_err(|e| e.to_string())?;
    for name in panel.column_names() {
        let col = panel.column(name).unwrap();
        let present: Vec<f64> = col.iter().flatten().copied().collect();
        if present.is_empty() {
            continue;
        }
        let got = describe_present(col.iter().copied()).map_err(|e| e.to_string())?;
        let (mean, median, max, min, std) = two_pass(&present);
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
        let std_ok = match (got.std, std) {
            (Some(a), Some(b)) => rel(a, b),
            (None, None) => true,
            _ => false,
        };
        if !(rel(got.mean, mean) && got.median == median && got.max == max && got.min == min && std_ok) {
            return Err(format!("{name}: {got:?} vs two-pass ({mean}, {median}, {max}, {min}, {std:?})"));
        }
    }
    Ok(())
}
