use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{Read, Write};

use chrono::NaiveDate;

use super::first_seen::{FirstSeenIndex, Novelty, Role};
use super::snapshot::{protocol_liquidity_usd, protocol_utilization, DailyAssetSnapshot};
use super::MetricsError;
use crate::decimal::Decimal;
use crate::ledger::{EventKind, EventRecord, ReplayMode, Replayer};

/// One role's activity on one day, split into new and repeat actors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoleActivity {
    pub actors: u64,
    pub new_actors: u64,
    pub count: u64,
    pub new_count: u64,
    pub volume_usd: Decimal,
    pub new_volume_usd: Decimal,
}

impl RoleActivity {
    /// Aggregates the initiating events of `role` among `day_events`, all of
    /// which must fall on `date`.
    pub fn from_events<'a>(
        day_events: impl IntoIterator<Item = &'a EventRecord>,
        role: Role,
        first_seen: &FirstSeenIndex,
        date: NaiveDate,
    ) -> Result<Self, MetricsError> {
        let mut out = RoleActivity::default();
        let mut seen: HashSet<&str> = HashSet::new();
        for ev in day_events {
            if Role::initiated_by(ev.kind) != Some(role) {
                continue;
            }
            let novelty = first_seen.classify(role, &ev.actor, date)?;
            let usd = ev.usd_value();
            out.count += 1;
            out.volume_usd += &usd;
            if novelty == Novelty::New {
                out.new_count += 1;
                out.new_volume_usd += &usd;
            }
            if seen.insert(ev.actor.as_str()) {
                out.actors += 1;
                if novelty == Novelty::New {
                    out.new_actors += 1;
                }
            }
        }
        Ok(out)
    }

    pub fn repeat_actors(&self) -> u64 {
        self.actors - self.new_actors
    }

    pub fn repeat_count(&self) -> u64 {
        self.count - self.new_count
    }

    pub fn repeat_volume_usd(&self) -> Decimal {
        &self.volume_usd - &self.new_volume_usd
    }

    /// Share of USD volume from repeat actors; missing on zero-volume days.
    pub fn repeat_ratio(&self) -> Option<f64> {
        self.volume_usd
            .is_positive()
            .then(|| self.repeat_volume_usd().to_f64() / self.volume_usd.to_f64())
    }

    pub fn average_usd(&self) -> Option<f64> {
        (self.count > 0).then(|| self.volume_usd.to_f64() / self.count as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepeatRatios {
    pub deposit: Option<f64>,
    pub loan: Option<f64>,
}

/// Repeat deposit and loan ratios for one day's events.
pub fn repeat_ratios(day_events: &[EventRecord], first_seen: &FirstSeenIndex) -> Result<RepeatRatios, MetricsError> {
    let Some(date) = day_events.first().map(EventRecord::day) else {
        return Ok(RepeatRatios {
            deposit: None,
            loan: None,
        });
    };
    let deposit = RoleActivity::from_events(day_events, Role::Depositor, first_seen, date)?;
    let loan = RoleActivity::from_events(day_events, Role::Borrower, first_seen, date)?;
    Ok(RepeatRatios {
        deposit: deposit.repeat_ratio(),
        loan: loan.repeat_ratio(),
    })
}

/// One day of protocol-level liquidity-risk measurements and loan/deposit
/// details. USD volumes and outstanding values are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyPanelRow {
    pub date: NaiveDate,
    pub liquidity_usd: Decimal,
    pub utilization: Option<f64>,
    pub repeat_deposit_ratio: Option<f64>,
    pub repeat_loan_ratio: Option<f64>,

    pub borrower: u64,
    pub loan_vol_usd: Decimal,
    pub loan_cnt: u64,
    pub new_borrower: u64,
    pub new_loan_vol_usd: Decimal,
    pub new_loan_cnt: u64,
    pub avg_loan_usd: Option<f64>,
    pub outstanding_loan_usd: Decimal,
    pub liquidation_usd: Decimal,
    pub repeat_borrower: u64,
    pub repeat_loan_vol_usd: Decimal,
    pub repeat_loan_cnt: u64,

    pub depositor: u64,
    pub deposit_vol_usd: Decimal,
    pub deposit_cnt: u64,
    pub new_depositor: u64,
    pub new_deposit_vol_usd: Decimal,
    pub new_deposit_cnt: u64,
    pub avg_deposit_usd: Option<f64>,
    pub outstanding_deposit_usd: Decimal,
    pub repeat_depositor: u64,
    pub repeat_deposit_vol_usd: Decimal,
    pub repeat_deposit_cnt: u64,
}

impl DailyPanelRow {
    fn assemble(
        date: NaiveDate,
        snapshots: &[DailyAssetSnapshot],
        loans: &RoleActivity,
        deposits: &RoleActivity,
        liquidation_usd: Decimal,
    ) -> Self {
        DailyPanelRow {
            date,
            liquidity_usd: protocol_liquidity_usd(snapshots),
            utilization: protocol_utilization(snapshots),
            repeat_deposit_ratio: deposits.repeat_ratio(),
            repeat_loan_ratio: loans.repeat_ratio(),
            borrower: loans.actors,
            loan_vol_usd: loans.volume_usd.clone(),
            loan_cnt: loans.count,
            new_borrower: loans.new_actors,
            new_loan_vol_usd: loans.new_volume_usd.clone(),
            new_loan_cnt: loans.new_count,
            avg_loan_usd: loans.average_usd(),
            outstanding_loan_usd: snapshots.iter().map(DailyAssetSnapshot::debt_usd).sum(),
            liquidation_usd,
            repeat_borrower: loans.repeat_actors(),
            repeat_loan_vol_usd: loans.repeat_volume_usd(),
            repeat_loan_cnt: loans.repeat_count(),
            depositor: deposits.actors,
            deposit_vol_usd: deposits.volume_usd.clone(),
            deposit_cnt: deposits.count,
            new_depositor: deposits.new_actors,
            new_deposit_vol_usd: deposits.new_volume_usd.clone(),
            new_deposit_cnt: deposits.new_count,
            avg_deposit_usd: deposits.average_usd(),
            outstanding_deposit_usd: snapshots.iter().map(DailyAssetSnapshot::deposit_usd).sum(),
            repeat_depositor: deposits.repeat_actors(),
            repeat_deposit_vol_usd: deposits.repeat_volume_usd(),
            repeat_deposit_cnt: deposits.repeat_count(),
        }
    }

    /// Available liquidity below zero means the log records more debt than
    /// deposits for some asset; it is reported as-is.
    pub fn has_negative_liquidity(&self) -> bool {
        self.liquidity_usd.is_negative()
    }
}

/// Builds one row per calendar day from the first to the last event day.
///
/// With `asset_filter`, events for other assets are dropped before anything
/// is computed, so first-seen histories are also restricted to the subset.
pub fn build_daily_panel(
    events: &[EventRecord],
    asset_filter: Option<&BTreeSet<String>>,
    mode: ReplayMode,
) -> Result<Vec<DailyPanelRow>, MetricsError> {
    let selected: Vec<(usize, &EventRecord)> = events
        .iter()
        .enumerate()
        .filter(|(_, ev)| asset_filter.is_none_or(|f| f.contains(&ev.asset)))
        .collect();
    let (Some(first), Some(last)) = (selected.first(), selected.last()) else {
        return Err(MetricsError::NoEvents);
    };
    let (first_day, last_day) = (first.1.day(), last.1.day());

    let mut replayer = Replayer::new(mode);
    let mut first_seen = FirstSeenIndex::new();
    let mut rows = Vec::new();
    let mut cursor = 0;
    for date in first_day.iter_days().take_while(|d| *d <= last_day) {
        let start = cursor;
        while cursor < selected.len() && selected[cursor].1.day() <= date {
            cursor += 1;
        }
        let today = &selected[start..cursor];
        for (index, ev) in today {
            replayer.push(ev).map_err(|mut e| {
                e.index = *index;
                e
            })?;
            first_seen.observe_event(ev);
        }
        let day_events = today.iter().map(|(_, ev)| *ev);
        let loans = RoleActivity::from_events(day_events.clone(), Role::Borrower, &first_seen, date)?;
        let deposits = RoleActivity::from_events(day_events.clone(), Role::Depositor, &first_seen, date)?;
        let liquidation_usd: Decimal = day_events
            .filter(|ev| ev.kind == EventKind::Liquidation)
            .map(EventRecord::usd_value)
            .sum();
        let snapshots: Vec<DailyAssetSnapshot> = replayer
            .pools()
            .values()
            .map(|pool| {
                let price = replayer
                    .close_price(&pool.asset)
                    .cloned()
                    .expect("every pool has seen at least one priced event");
                DailyAssetSnapshot::from_pool(pool, date, price)
            })
            .collect();
        rows.push(DailyPanelRow::assemble(date, &snapshots, &loans, &deposits, liquidation_usd));
    }
    // Leftovers only exist when the log is out of order; the replayer reports it.
    for (index, ev) in &selected[cursor..] {
        replayer.push(ev).map_err(|mut e| {
            e.index = *index;
            e
        })?;
    }
    Ok(rows)
}

pub const PANEL_COLUMNS: [&str; 28] = [
    "date",
    "liquidity_usd",
    "utilization",
    "repeat_deposit_ratio",
    "repeat_loan_ratio",
    "borrower",
    "loan_vol_usd",
    "loan_cnt",
    "new_borrower",
    "new_loan_vol_usd",
    "new_loan_cnt",
    "avg_loan_usd",
    "outstanding_loan_usd",
    "liquidation_usd",
    "repeat_borrower",
    "repeat_loan_vol_usd",
    "repeat_loan_cnt",
    "depositor",
    "deposit_vol_usd",
    "deposit_cnt",
    "new_depositor",
    "new_deposit_vol_usd",
    "new_deposit_cnt",
    "avg_deposit_usd",
    "outstanding_deposit_usd",
    "repeat_depositor",
    "repeat_deposit_vol_usd",
    "repeat_deposit_cnt",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the panel as CSV with full precision; missing values are empty cells.
pub fn write_panel_csv<W: Write>(rows: &[DailyPanelRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(PANEL_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.date.to_string(),
            r.liquidity_usd.to_string(),
            opt(r.utilization),
            opt(r.repeat_deposit_ratio),
            opt(r.repeat_loan_ratio),
            r.borrower.to_string(),
            r.loan_vol_usd.to_string(),
            r.loan_cnt.to_string(),
            r.new_borrower.to_string(),
            r.new_loan_vol_usd.to_string(),
            r.new_loan_cnt.to_string(),
            opt(r.avg_loan_usd),
            r.outstanding_loan_usd.to_string(),
            r.liquidation_usd.to_string(),
            r.repeat_borrower.to_string(),
            r.repeat_loan_vol_usd.to_string(),
            r.repeat_loan_cnt.to_string(),
            r.depositor.to_string(),
            r.deposit_vol_usd.to_string(),
            r.deposit_cnt.to_string(),
            r.new_depositor.to_string(),
            r.new_deposit_vol_usd.to_string(),
            r.new_deposit_cnt.to_string(),
            opt(r.avg_deposit_usd),
            r.outstanding_deposit_usd.to_string(),
            r.repeat_depositor.to_string(),
            r.repeat_deposit_vol_usd.to_string(),
            r.repeat_deposit_cnt.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a panel written by [`write_panel_csv`].
pub fn read_panel_csv<R: Read>(input: R) -> Result<Vec<DailyPanelRow>, MetricsError> {
    let fmt_err = |msg: String| MetricsError::PanelFormat(msg);
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(|e| fmt_err(e.to_string()))?.clone();
    if headers.iter().ne(PANEL_COLUMNS) {
        return Err(fmt_err(format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| fmt_err(e.to_string()))?;
        let cell: BTreeMap<&str, &str> = PANEL_COLUMNS.iter().copied().zip(rec.iter()).collect();
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |col: &str| fmt_err(format!("line {line}: bad {col} {:?}", cell[col]));
        let dec = |col: &str| cell[col].parse::<Decimal>().map_err(|_| bad(col));
        let int = |col: &str| cell[col].parse::<u64>().map_err(|_| bad(col));
        let real = |col: &str| match cell[col] {
            "" => Ok(None),
            s => s.parse::<f64>().map(Some).map_err(|_| bad(col)),
        };
        rows.push(DailyPanelRow {
            date: cell["date"].parse().map_err(|_| bad("date"))?,
            liquidity_usd: dec("liquidity_usd")?,
            utilization: real("utilization")?,
            repeat_deposit_ratio: real("repeat_deposit_ratio")?,
            repeat_loan_ratio: real("repeat_loan_ratio")?,
            borrower: int("borrower")?,
            loan_vol_usd: dec("loan_vol_usd")?,
            loan_cnt: int("loan_cnt")?,
            new_borrower: int("new_borrower")?,
            new_loan_vol_usd: dec("new_loan_vol_usd")?,
            new_loan_cnt: int("new_loan_cnt")?,
            avg_loan_usd: real("avg_loan_usd")?,
            outstanding_loan_usd: dec("outstanding_loan_usd")?,
            liquidation_usd: dec("liquidation_usd")?,
            repeat_borrower: int("repeat_borrower")?,
            repeat_loan_vol_usd: dec("repeat_loan_vol_usd")?,
            repeat_loan_cnt: int("repeat_loan_cnt")?,
            depositor: int("depositor")?,
            deposit_vol_usd: dec("deposit_vol_usd")?,
            deposit_cnt: int("deposit_cnt")?,
            new_depositor: int("new_depositor")?,
            new_deposit_vol_usd: dec("new_deposit_vol_usd")?,
            new_deposit_cnt: int("new_deposit_cnt")?,
            avg_deposit_usd: real("avg_deposit_usd")?,
            outstanding_deposit_usd: dec("outstanding_deposit_usd")?,
            repeat_depositor: int("repeat_depositor")?,
            repeat_deposit_vol_usd: dec("repeat_deposit_vol_usd")?,
            repeat_deposit_cnt: int("repeat_deposit_cnt")?,
        });
    }
    Ok(rows)
}
