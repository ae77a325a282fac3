use std::collections::BTreeSet;
use std::io::Read;

use chrono::NaiveDate;

use super::{Diagnostic, IngestError};

/// Bundled calendar of major DeFi exploits, 2020-2022.
pub const HACK_CALENDAR_CSV: &str = include_str!("../../data/hack_calendar.csv");

/// The sixteen most-traded Aave assets used for the mainstream subset.
pub const MAINSTREAM_ASSETS: [&str; 16] = [
    "ETH", "WBTC", "USDC", "USDT", "DAI", "TUSD", "sUSD", "BUSD", "FEI", "FRAX", "AAVE", "CRV", "SNX",
    "YFI", "LINK", "stETH",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HackEvent {
    pub date: NaiveDate,
    pub protocol: String,
}

/// Parses a `date,protocol` CSV.
pub fn parse_hack_calendar<R: Read>(input: R) -> Result<Vec<HackEvent>, IngestError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(["date", "protocol"]) {
        return Err(IngestError::Header {
            expected: "date,protocol".into(),
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let date = rec[0]
            .parse()
            .map_err(|_| IngestError::Invalid(Diagnostic::new(line, "date", format!("invalid date {:?}", &rec[0]))))?;
        out.push(HackEvent {
            date,
            protocol: rec[1].to_string(),
        });
    }
    out.sort_by_key(|h| h.date);
    Ok(out)
}

pub fn bundled_hack_calendar() -> Vec<HackEvent> {
    parse_hack_calendar(HACK_CALENDAR_CSV.as_bytes()).expect("bundled calendar is well-formed")
}

/// One symbol per line; blank lines and `#` comments are ignored.
pub fn parse_asset_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn mainstream_assets() -> BTreeSet<String> {
    MAINSTREAM_ASSETS.iter().map(|s| s.to_string()).collect()
}
