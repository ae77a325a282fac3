//! File formats: event logs, protocol factor panels, the hack calendar and
//! asset lists.

mod calendar;
mod events;
mod factors;
mod prices;

pub use calendar::{
    mainstream_assets, parse_asset_list, parse_hack_calendar, bundled_hack_calendar, HackEvent,
    HACK_CALENDAR_CSV, MAINSTREAM_ASSETS,
};
pub use events::{
    parse_events, write_events, write_events_csv, write_events_jsonl, EventFormat, ParsedEvents,
    EVENT_COLUMNS,
};
pub use factors::{parse_factor_panel, write_factor_panel, FactorPanelRow, FACTOR_COLUMNS};
pub use prices::resolve_daily_prices;

use std::fmt;

use chrono::NaiveDate;

/// One problem found in an input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u64,
    pub field: String,
    pub reason: String,
}

impl Diagnostic {
    pub fn new(line: u64, field: impl Into<String>, reason: impl Into<String>) -> Self {
        Diagnostic {
            line,
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.field, self.reason)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad header: expected {expected:?}, found {found:?}")]
    Header { expected: String, found: String },
    #[error("header is missing column {0:?}")]
    MissingColumn(String),
    #[error("{} diagnostic(s) in strict mode, first: {}", .0.len(), .0[0])]
    Strict(Vec<Diagnostic>),
    #[error("{0}")]
    Invalid(Diagnostic),
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
}
