use std::fmt::Write as _;

use super::panel::DailyPanelRow;
use super::stats::{describe_present, Descriptive};

/// One titled block of the descriptive-statistics report.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsSection {
    pub title: &'static str,
    /// (label, statistics over the non-missing days, missing-day count)
    pub rows: Vec<(&'static str, Option<Descriptive>, usize)>,
}

type Getter = fn(&DailyPanelRow) -> Option<f64>;

fn f(x: &crate::decimal::Decimal) -> Option<f64> {
    Some(x.to_f64())
}

fn c(x: u64) -> Option<f64> {
    Some(x as f64)
}

const MEASURES: [(&str, Getter); 4] = [
    ("Liquidity", |r| f(&r.liquidity_usd)),
    ("Utilization", |r| r.utilization),
    ("Repeat deposit ratio", |r| r.repeat_deposit_ratio),
    ("Repeat loan ratio", |r| r.repeat_loan_ratio),
];

const LOANS: [(&str, Getter); 12] = [
    ("Borrower", |r| c(r.borrower)),
    ("Loan vol usd", |r| f(&r.loan_vol_usd)),
    ("Loan cnt", |r| c(r.loan_cnt)),
    ("New borrower", |r| c(r.new_borrower)),
    ("New loan vol usd", |r| f(&r.new_loan_vol_usd)),
    ("New loan cnt", |r| c(r.new_loan_cnt)),
    ("Avg loan usd", |r| r.avg_loan_usd),
    ("Outstanding loan", |r| f(&r.outstanding_loan_usd)),
    ("Liquidation usd", |r| f(&r.liquidation_usd)),
    ("Repeat borrower", |r| c(r.repeat_borrower)),
    ("Repeat loan vol usd", |r| f(&r.repeat_loan_vol_usd)),
    ("Repeat loan cnt", |r| c(r.repeat_loan_cnt)),
];

const DEPOSITS: [(&str, Getter); 11] = [
    ("Depositor", |r| c(r.depositor)),
    ("Deposit vol usd", |r| f(&r.deposit_vol_usd)),
    ("Deposit cnt", |r| c(r.deposit_cnt)),
    ("New depositor", |r| c(r.new_depositor)),
    ("New deposit vol usd", |r| f(&r.new_deposit_vol_usd)),
    ("New deposit cnt", |r| c(r.new_deposit_cnt)),
    ("Avg deposit usd", |r| r.avg_deposit_usd),
    ("Outstanding deposit", |r| f(&r.outstanding_deposit_usd)),
    ("Repeat depositor", |r| c(r.repeat_depositor)),
    ("Repeat deposit vol usd", |r| f(&r.repeat_deposit_vol_usd)),
    ("Repeat deposit cnt", |r| c(r.repeat_deposit_cnt)),
];

fn section(title: &'static str, getters: &[(&'static str, Getter)], rows: &[DailyPanelRow]) -> StatsSection {
    StatsSection {
        title,
        rows: getters
            .iter()
            .map(|(label, get)| {
                let values: Vec<Option<f64>> = rows.iter().map(get).collect();
                let missing = values.iter().filter(|v| v.is_none()).count();
                (*label, describe_present(values).ok(), missing)
            })
            .collect(),
    }
}

/// Risk measurements first, then loan and deposit details.
pub fn stats_sections(rows: &[DailyPanelRow]) -> Vec<StatsSection> {
    vec![
        section("Liquidity risk measurements", &MEASURES, rows),
        section("Panel A: Loan details", &LOANS, rows),
        section("Panel B: Deposit details", &DEPOSITS, rows),
    ]
}

fn cell(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Markdown report with Mean, Median, Maximum, Minimum and Std columns.
pub fn render_stats_markdown(rows: &[DailyPanelRow], footer: Option<&str>) -> String {
    let mut out = String::from("# Descriptive statistics\n\n");
    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        writeln!(out, "Daily panel from {} to {} ({} days).\n", first.date, last.date, rows.len()).unwrap();
    }
    let mut notes = Vec::new();
    for sec in stats_sections(rows) {
        writeln!(out, "## {}\n", sec.title).unwrap();
        out.push_str("| Variable | Mean | Median | Maximum | Minimum | Std |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|\n");
        for (label, stats, missing) in sec.rows {
            let cells = match stats {
                Some(d) => [
                    cell(d.mean),
                    cell(d.median),
                    cell(d.max),
                    cell(d.min),
                    d.std.map_or_else(|| "n/a".into(), cell),
                ],
                None => std::array::from_fn(|_| "n/a".to_string()),
            };
            writeln!(out, "| {label} | {} |", cells.join(" | ")).unwrap();
            if missing > 0 {
                notes.push(format!("{label}: {missing} day(s) without volume excluded."));
            }
        }
        out.push('\n');
    }
    if !notes.is_empty() {
        for n in notes {
            writeln!(out, "{n}  ").unwrap();
        }
        out.push('\n');
    }
    if let Some(footer) = footer {
        writeln!(out, "{footer}").unwrap();
    }
    out
}
