use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::decimal::Decimal;
use crate::ledger::EventRecord;

/// Daily close price per asset: the day's last event price, carried forward
/// through the last day of the log. Days before an asset's first price have
/// no entry.
pub fn resolve_daily_prices(events: &[EventRecord]) -> BTreeMap<(String, NaiveDate), Decimal> {
    let Some(last_day) = events.iter().map(EventRecord::day).max() else {
        return BTreeMap::new();
    };
    let mut observed: BTreeMap<&str, BTreeMap<NaiveDate, &Decimal>> = BTreeMap::new();
    for ev in events {
        observed.entry(&ev.asset).or_default().insert(ev.day(), &ev.price_usd);
    }
    let mut out = BTreeMap::new();
    for (asset, by_day) in observed {
        let first_day = *by_day.keys().next().expect("non-empty");
        let mut current: Option<&Decimal> = None;
        for day in first_day.iter_days().take_while(|d| *d <= last_day) {
            if let Some(p) = by_day.get(&day) {
                current = Some(p);
            }
            if let Some(p) = current {
                out.insert((asset.to_string(), day), p.clone());
            }
        }
    }
    out
}
