use std::fmt;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

/// Aave V2 launch.
pub const AAVE_V2_LAUNCH: NaiveDate = match NaiveDate::from_ymd_opt(2020, 12, 3) {
    Some(d) => d,
    None => panic!(),
};

/// Compound V3 deployment.
pub const COMPOUND_V3_LAUNCH: NaiveDate = match NaiveDate::from_ymd_opt(2022, 8, 25) {
    Some(d) => d,
    None => panic!(),
};

/// Days after a hack that still count as the hack window.
pub const HACK_TRAILING_DAYS: u64 = 6;

pub fn dummy_v2(date: NaiveDate) -> u8 {
    u8::from(date >= AAVE_V2_LAUNCH)
}

pub fn dummy_v3(date: NaiveDate) -> u8 {
    u8::from(date >= COMPOUND_V3_LAUNCH)
}

/// 1 iff some hack `h` satisfies `date - 6 <= h <= date`.
pub fn dummy_hack(date: NaiveDate, hack_dates: &[NaiveDate]) -> u8 {
    let earliest = date - Days::new(HACK_TRAILING_DAYS);
    u8::from(hack_dates.iter().any(|h| *h >= earliest && *h <= date))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DummyKind {
    V2,
    V3,
    Hack,
}

impl DummyKind {
    pub fn indicator(self, date: NaiveDate, hack_dates: &[NaiveDate]) -> f64 {
        f64::from(match self {
            DummyKind::V2 => dummy_v2(date),
            DummyKind::V3 => dummy_v3(date),
            DummyKind::Hack => dummy_hack(date, hack_dates),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            DummyKind::V2 => "v2",
            DummyKind::V3 => "v3",
            DummyKind::Hack => "hack",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DummyKind::V2 => "V2",
            DummyKind::V3 => "V3",
            DummyKind::Hack => "Hack",
        }
    }
}

impl fmt::Display for DummyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
