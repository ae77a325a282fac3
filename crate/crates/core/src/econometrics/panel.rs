use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use chrono::NaiveDate;

use super::EconError;
use crate::ingest::FactorPanelRow;
use crate::metrics::DailyPanelRow;

/// Named numeric columns over a gap-free daily calendar. Days with no data
/// are rows of missing values, so a one-row lag is always a one-day lag.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericPanel {
    dates: Vec<NaiveDate>,
    columns: BTreeMap<String, Vec<Option<f64>>>,
}

impl NumericPanel {
    /// Builds a panel from dated rows of `(column, value)` pairs; dates may be
    /// sparse and unordered but not repeated.
    pub fn from_rows<I, C>(rows: I) -> Result<Self, EconError>
    where
        I: IntoIterator<Item = (NaiveDate, C)>,
        C: IntoIterator<Item = (String, Option<f64>)>,
    {
        let mut by_date: BTreeMap<NaiveDate, Vec<(String, Option<f64>)>> = BTreeMap::new();
        let mut names = BTreeSet::new();
        for (date, cells) in rows {
            let cells: Vec<_> = cells.into_iter().collect();
            names.extend(cells.iter().map(|(n, _)| n.clone()));
            if by_date.insert(date, cells).is_some() {
                return Err(EconError::DuplicateDate(date));
            }
        }
        let dates = calendar(by_date.keys().next().copied(), by_date.keys().next_back().copied());
        let mut columns: BTreeMap<String, Vec<Option<f64>>> =
            names.into_iter().map(|n| (n, vec![None; dates.len()])).collect();
        if let Some(start) = dates.first() {
            for (date, cells) in by_date {
                let i = (date - *start).num_days() as usize;
                for (name, v) in cells {
                    columns.get_mut(&name).expect("name registered")[i] = v;
                }
            }
        }
        Ok(NumericPanel { dates, columns })
    }

    pub fn from_daily_rows(rows: &[DailyPanelRow]) -> Result<Self, EconError> {
        Self::from_rows(rows.iter().map(|r| {
            let d = |x: &crate::decimal::Decimal| Some(x.to_f64());
            let c = |x: u64| Some(x as f64);
            let cells = vec![
                ("liquidity_usd", d(&r.liquidity_usd)),
                ("utilization", r.utilization),
                ("repeat_deposit_ratio", r.repeat_deposit_ratio),
                ("repeat_loan_ratio", r.repeat_loan_ratio),
                ("borrower", c(r.borrower)),
                ("loan_vol_usd", d(&r.loan_vol_usd)),
                ("loan_cnt", c(r.loan_cnt)),
                ("new_borrower", c(r.new_borrower)),
                ("new_loan_vol_usd", d(&r.new_loan_vol_usd)),
                ("new_loan_cnt", c(r.new_loan_cnt)),
                ("avg_loan_usd", r.avg_loan_usd),
                ("outstanding_loan_usd", d(&r.outstanding_loan_usd)),
                ("liquidation_usd", d(&r.liquidation_usd)),
                ("repeat_borrower", c(r.repeat_borrower)),
                ("repeat_loan_vol_usd", d(&r.repeat_loan_vol_usd)),
                ("repeat_loan_cnt", c(r.repeat_loan_cnt)),
                ("depositor", c(r.depositor)),
                ("deposit_vol_usd", d(&r.deposit_vol_usd)),
                ("deposit_cnt", c(r.deposit_cnt)),
                ("new_depositor", c(r.new_depositor)),
                ("new_deposit_vol_usd", d(&r.new_deposit_vol_usd)),
                ("new_deposit_cnt", c(r.new_deposit_cnt)),
                ("avg_deposit_usd", r.avg_deposit_usd),
                ("outstanding_deposit_usd", d(&r.outstanding_deposit_usd)),
                ("repeat_depositor", c(r.repeat_depositor)),
                ("repeat_deposit_vol_usd", d(&r.repeat_deposit_vol_usd)),
                ("repeat_deposit_cnt", c(r.repeat_deposit_cnt)),
            ];
            (r.date, cells.into_iter().map(|(n, v)| (n.to_string(), v)))
        }))
    }

    pub fn from_factor_rows(rows: &[FactorPanelRow]) -> Result<Self, EconError> {
        Self::from_rows(rows.iter().map(|r| {
            let c = |x: Option<u64>| x.map(|v| v as f64);
            let cells = vec![
                ("mktc_f", r.mktc_f),
                ("mktc_c", r.mktc_c),
                ("token_price_usd", r.token_price_usd),
                ("tvl_usd", r.tvl_usd),
                ("revenue_usd", r.revenue_usd),
                ("holder_count", c(r.holder_count)),
                ("active_users", c(r.active_users)),
                ("developers", c(r.developers)),
            ];
            (r.date, cells.into_iter().map(|(n, v)| (n.to_string(), v)))
        }))
    }

    /// Reads any CSV with a `date` column; every other column must be numeric
    /// or empty.
    pub fn from_csv<R: Read>(input: R) -> Result<Self, EconError> {
        let fmt_err = |m: String| EconError::PanelFormat(m);
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers().map_err(|e| fmt_err(e.to_string()))?.clone();
        let date_col = headers
            .iter()
            .position(|h| h == "date")
            .ok_or_else(|| fmt_err("missing date column".into()))?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| fmt_err(e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let date: NaiveDate = rec[date_col]
                .parse()
                .map_err(|_| fmt_err(format!("line {line}: invalid date {:?}", &rec[date_col])))?;
            let mut cells = Vec::with_capacity(headers.len());
            for (i, name) in headers.iter().enumerate() {
                if i == date_col {
                    continue;
                }
                let raw = rec.get(i).unwrap_or("").trim();
                let v = if raw.is_empty() {
                    None
                } else {
                    Some(raw.parse::<f64>().map_err(|_| fmt_err(format!("line {line}: {name}: not a number {raw:?}")))?)
                };
                cells.push((name.to_string(), v));
            }
            rows.push((date, cells));
        }
        Self::from_rows(rows)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        self.columns.get(name).map(Vec::as_slice)
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn set_column(&mut self, name: impl Into<String>, values: Vec<Option<f64>>) {
        assert_eq!(values.len(), self.dates.len(), "column length must match the calendar");
        self.columns.insert(name.into(), values);
    }

    fn reindexed(&self, name: &str, dates: &[NaiveDate]) -> Vec<Option<f64>> {
        let col = &self.columns[name];
        let Some(start) = self.dates.first() else {
            return vec![None; dates.len()];
        };
        dates
            .iter()
            .map(|d| {
                let off = (*d - *start).num_days();
                if off < 0 {
                    None
                } else {
                    col.get(off as usize).copied().flatten()
                }
            })
            .collect()
    }

    /// Outer join on date over the union calendar. Column names must not clash.
    pub fn merge(&self, other: &NumericPanel) -> Result<NumericPanel, EconError> {
        if let Some(clash) = self.columns.keys().find(|k| other.columns.contains_key(*k)) {
            return Err(EconError::DuplicateColumn(clash.clone()));
        }
        let first = self.dates.first().into_iter().chain(other.dates.first()).min().copied();
        let last = self.dates.last().into_iter().chain(other.dates.last()).max().copied();
        let dates = calendar(first, last);
        let mut columns = BTreeMap::new();
        for panel in [self, other] {
            for name in panel.columns.keys() {
                columns.insert(name.clone(), panel.reindexed(name, &dates));
            }
        }
        Ok(NumericPanel { dates, columns })
    }

    /// Replaces the listed columns with those of `other`, aligned by date.
    pub fn override_columns(&mut self, other: &NumericPanel, names: &[&str]) -> Result<(), EconError> {
        for name in names {
            if !other.columns.contains_key(*name) {
                return Err(EconError::UnknownVariable(name.to_string()));
            }
            let values = other.reindexed(name, &self.dates);
            self.columns.insert(name.to_string(), values);
        }
        Ok(())
    }
}

fn calendar(first: Option<NaiveDate>, last: Option<NaiveDate>) -> Vec<NaiveDate> {
    match (first, last) {
        (Some(a), Some(b)) => a.iter_days().take_while(|d| *d <= b).collect(),
        _ => Vec::new(),
    }
}
