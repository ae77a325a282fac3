use std::collections::BTreeSet;
use std::io::{Read, Write};

use chrono::NaiveDate;

use super::{Diagnostic, IngestError};

pub const FACTOR_COLUMNS: [&str; 9] = [
    "date",
    "mktc_f",
    "mktc_c",
    "token_price_usd",
    "tvl_usd",
    "revenue_usd",
    "holder_count",
    "active_users",
    "developers",
];

/// One day of protocol-level factors. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPanelRow {
    pub date: NaiveDate,
    /// Market cap at maximum token supply.
    pub mktc_f: Option<f64>,
    /// Market cap at circulating supply.
    pub mktc_c: Option<f64>,
    pub token_price_usd: Option<f64>,
    pub tvl_usd: Option<f64>,
    pub revenue_usd: Option<f64>,
    pub holder_count: Option<u64>,
    pub active_users: Option<u64>,
    pub developers: Option<u64>,
}

impl FactorPanelRow {
    pub fn empty(date: NaiveDate) -> Self {
        FactorPanelRow {
            date,
            mktc_f: None,
            mktc_c: None,
            token_price_usd: None,
            tvl_usd: None,
            revenue_usd: None,
            holder_count: None,
            active_users: None,
            developers: None,
        }
    }
}

/// Parses a factor panel. Columns may appear in any order (extra columns are
/// ignored); output is sorted by date.
pub fn parse_factor_panel<R: Read>(input: R) -> Result<Vec<FactorPanelRow>, IngestError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut pos = [0usize; 9];
    for (slot, name) in pos.iter_mut().zip(FACTOR_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))?;
    }
    let mut rows = Vec::new();
    let mut dates = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = |i: usize| rec.get(pos[i]).unwrap_or("").trim();
        let invalid = |i: usize, what: &str| {
            IngestError::Invalid(Diagnostic::new(
                line,
                FACTOR_COLUMNS[i],
                format!("{what} {:?}", cell(i)),
            ))
        };
        let real = |i: usize| -> Result<Option<f64>, IngestError> {
            match cell(i) {
                "" => Ok(None),
                s => match s.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(Some(v)),
                    _ => Err(invalid(i, "unparseable number")),
                },
            }
        };
        let count = |i: usize| -> Result<Option<u64>, IngestError> {
            match cell(i) {
                "" => Ok(None),
                s => s.parse::<u64>().map(Some).map_err(|_| invalid(i, "not a non-negative integer")),
            }
        };
        let date: NaiveDate = cell(0).parse().map_err(|_| invalid(0, "invalid date"))?;
        if !dates.insert(date) {
            return Err(IngestError::DuplicateDate(date));
        }
        rows.push(FactorPanelRow {
            date,
            mktc_f: real(1)?,
            mktc_c: real(2)?,
            token_price_usd: real(3)?,
            tvl_usd: real(4)?,
            revenue_usd: real(5)?,
            holder_count: count(6)?,
            active_users: count(7)?,
            developers: count(8)?,
        });
    }
    rows.sort_by_key(|r| r.date);
    Ok(rows)
}

pub fn write_factor_panel<W: Write>(rows: &[FactorPanelRow], out: W) -> csv::Result<()> {
    fn o<T: ToString>(v: &Option<T>) -> String {
        v.as_ref().map(T::to_string).unwrap_or_default()
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(FACTOR_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.date.to_string(),
            o(&r.mktc_f),
            o(&r.mktc_c),
            o(&r.token_price_usd),
            o(&r.tvl_usd),
            o(&r.revenue_usd),
            o(&r.holder_count),
            o(&r.active_users),
            o(&r.developers),
        ])?;
    }
    w.flush()?;
    Ok(())
}
