use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

use super::{Diagnostic, IngestError};
use crate::decimal::Decimal;
use crate::ledger::{EventKind, EventRecord, ReplayMode};

pub const EVENT_COLUMNS: [&str; 6] = ["timestamp", "event_kind", "asset", "actor", "amount", "price_usd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    Csv,
    Jsonl,
}

impl EventFormat {
    /// `.jsonl`/`.ndjson` are JSON lines, anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => EventFormat::Jsonl,
            _ => EventFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedEvents {
    pub events: Vec<EventRecord>,
    /// Source line of each event.
    pub lines: Vec<u64>,
    pub diagnostics: Vec<Diagnostic>,
    /// Index of the first event whose timestamp precedes its predecessor's.
    pub first_out_of_order: Option<usize>,
}

/// Raw textual fields of one record, before validation.
struct RawFields<'a> {
    timestamp: Option<&'a str>,
    event_kind: Option<&'a str>,
    asset: Option<&'a str>,
    actor: Option<&'a str>,
    amount: Option<&'a str>,
    price_usd: Option<&'a str>,
}

fn validate(line: u64, raw: RawFields<'_>, diags: &mut Vec<Diagnostic>) -> Option<EventRecord> {
    let before = diags.len();
    let mut need = |field: &str, v: Option<&str>| -> Option<String> {
        match v {
            Some(s) => Some(s.to_string()),
            None => {
                diags.push(Diagnostic::new(line, field, "missing"));
                None
            }
        }
    };
    let ts = need("timestamp", raw.timestamp);
    let kind = need("event_kind", raw.event_kind);
    let asset = need("asset", raw.asset);
    let actor = need("actor", raw.actor);
    let amount = need("amount", raw.amount);
    let price = need("price_usd", raw.price_usd);

    let timestamp = ts.and_then(|s| match DateTime::parse_from_rfc3339(&s) {
        Ok(t) => Some(t.with_timezone(&Utc)),
        Err(e) => {
            diags.push(Diagnostic::new(line, "timestamp", format!("invalid ISO-8601 timestamp {s:?}: {e}")));
            None
        }
    });
    let kind = kind.and_then(|s| match s.parse::<EventKind>() {
        Ok(k) => Some(k),
        Err(e) => {
            diags.push(Diagnostic::new(line, "event_kind", e.to_string()));
            None
        }
    });
    let mut nonempty = |field: &str, v: Option<String>| {
        v.and_then(|s| {
            if s.is_empty() {
                diags.push(Diagnostic::new(line, field, "empty"));
                None
            } else {
                Some(s)
            }
        })
    };
    let asset = nonempty("asset", asset);
    let actor = nonempty("actor", actor);
    let mut decimal = |field: &str, v: Option<String>| {
        v.and_then(|s| match Decimal::parse_amount(&s) {
            Ok(d) => Some(d),
            Err(e) => {
                diags.push(Diagnostic::new(line, field, e.to_string()));
                None
            }
        })
    };
    let amount = decimal("amount", amount);
    let price_usd = decimal("price_usd", price);

    if diags.len() > before {
        return None;
    }
    Some(EventRecord {
        timestamp: timestamp?,
        kind: kind?,
        asset: asset?,
        actor: actor?,
        amount: amount?,
        price_usd: price_usd?,
    })
}

/// Parses an event log. Rows with diagnostics are skipped in lenient mode; in
/// strict mode any diagnostic aborts. Order is checked, never repaired.
pub fn parse_events<R: Read>(input: R, format: EventFormat, mode: ReplayMode) -> Result<ParsedEvents, IngestError> {
    let mut out = ParsedEvents::default();
    match format {
        EventFormat::Csv => parse_csv(input, &mut out)?,
        EventFormat::Jsonl => parse_jsonl(input, &mut out)?,
    }
    if mode == ReplayMode::Strict && !out.diagnostics.is_empty() {
        return Err(IngestError::Strict(out.diagnostics));
    }
    out.first_out_of_order = out
        .events
        .windows(2)
        .position(|w| w[1].timestamp < w[0].timestamp)
        .map(|i| i + 1);
    Ok(out)
}

fn parse_csv<R: Read>(input: R, out: &mut ParsedEvents) -> Result<(), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(EVENT_COLUMNS) {
        return Err(IngestError::Header {
            expected: EVENT_COLUMNS.join(","),
            found: headers.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut record = csv::StringRecord::new();
    loop {
        match rdr.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {
                let line = record.position().map_or(0, |p| p.line());
                if record.len() != EVENT_COLUMNS.len() {
                    out.diagnostics.push(Diagnostic::new(
                        line,
                        "record",
                        format!("expected {} fields, found {}", EVENT_COLUMNS.len(), record.len()),
                    ));
                    continue;
                }
                let raw = RawFields {
                    timestamp: record.get(0),
                    event_kind: record.get(1),
                    asset: record.get(2),
                    actor: record.get(3),
                    amount: record.get(4),
                    price_usd: record.get(5),
                };
                if let Some(ev) = validate(line, raw, &mut out.diagnostics) {
                    out.events.push(ev);
                    out.lines.push(line);
                }
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                if let csv::ErrorKind::Io(_) = e.kind() {
                    return Err(e.into());
                }
                out.diagnostics.push(Diagnostic::new(line, "record", e.to_string()));
            }
        }
    }
    Ok(())
}

fn parse_jsonl<R: Read>(input: R, out: &mut ParsedEvents) -> Result<(), IngestError> {
    let reader = BufReader::new(input);
    for (i, line) in reader.split(b'\n').enumerate() {
        let line_no = i as u64 + 1;
        let bytes = line?;
        let Ok(text) = std::str::from_utf8(&bytes) else {
            out.diagnostics.push(Diagnostic::new(line_no, "record", "invalid UTF-8"));
            continue;
        };
        if text.trim().is_empty() {
            continue;
        }
        let obj = match serde_json::from_str::<Value>(text) {
            Ok(Value::Object(map)) => map,
            Ok(_) => {
                out.diagnostics.push(Diagnostic::new(line_no, "record", "not a JSON object"));
                continue;
            }
            Err(e) => {
                out.diagnostics.push(Diagnostic::new(line_no, "record", format!("invalid JSON: {e}")));
                continue;
            }
        };
        let mut bad = false;
        for key in obj.keys() {
            if !EVENT_COLUMNS.contains(&key.as_str()) {
                out.diagnostics.push(Diagnostic::new(line_no, key.clone(), "unknown field"));
                bad = true;
            }
        }
        // numbers keep their source text (arbitrary_precision), so amounts stay exact
        let texts: Vec<Option<String>> = EVENT_COLUMNS
            .iter()
            .map(|k| match obj.get(*k) {
                Some(Value::String(s)) => Some(s.clone()),
                Some(Value::Number(n)) => Some(n.to_string()),
                Some(other) => Some(other.to_string()),
                None => None,
            })
            .collect();
        let raw = RawFields {
            timestamp: texts[0].as_deref(),
            event_kind: texts[1].as_deref(),
            asset: texts[2].as_deref(),
            actor: texts[3].as_deref(),
            amount: texts[4].as_deref(),
            price_usd: texts[5].as_deref(),
        };
        if let Some(ev) = validate(line_no, raw, &mut out.diagnostics) {
            if !bad {
                out.events.push(ev);
                out.lines.push(line_no);
            }
        }
    }
    Ok(())
}

fn timestamp_text(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

pub fn write_events_csv<W: Write>(events: &[EventRecord], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(EVENT_COLUMNS)?;
    for ev in events {
        w.write_record([
            timestamp_text(&ev.timestamp),
            ev.kind.as_str().to_string(),
            ev.asset.clone(),
            ev.actor.clone(),
            ev.amount.to_string(),
            ev.price_usd.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonEvent<'a> {
    timestamp: String,
    event_kind: &'a str,
    asset: &'a str,
    actor: &'a str,
    amount: String,
    price_usd: String,
}

pub fn write_events_jsonl<W: Write>(events: &[EventRecord], mut out: W) -> std::io::Result<()> {
    for ev in events {
        let row = JsonEvent {
            timestamp: timestamp_text(&ev.timestamp),
            event_kind: ev.kind.as_str(),
            asset: &ev.asset,
            actor: &ev.actor,
            amount: ev.amount.to_string(),
            price_usd: ev.price_usd.to_string(),
        };
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_events<W: Write>(events: &[EventRecord], format: EventFormat, out: W) -> Result<(), IngestError> {
    match format {
        EventFormat::Csv => write_events_csv(events, out)?,
        EventFormat::Jsonl => write_events_jsonl(events, out)?,
    }
    Ok(())
}
