//! Reader for flat CSV event tables (one row per event).

use std::collections::HashMap;
use std::io::Read;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::{EventLog, EventLogBuilder};
use crate::activity::{is_reserved_label, ActivityId};
use crate::error::LogError;

/// Header names of the case, activity and (optional) timestamp columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub case: String,
    pub activity: String,
    pub timestamp: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            case: "case".into(),
            activity: "activity".into(),
            timestamp: Some("timestamp".into()),
        }
    }
}

/// Rows are grouped by case id (cases ordered by first appearance) and
/// sorted by timestamp; rows with equal timestamps keep their input order.
pub fn parse_csv<R: Read>(input: R, mapping: &ColumnMapping) -> Result<EventLog, LogError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| LogError::MissingColumn(name.to_string()))
    };
    let case_col = column(&mapping.case)?;
    let activity_col = column(&mapping.activity)?;
    let time_col = mapping.timestamp.as_deref().map(column).transpose()?;

    let mut case_index: HashMap<String, usize> = HashMap::new();
    let mut cases: Vec<Vec<(i128, ActivityId)>> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let field = |col: usize, name: &str| {
            record
                .get(col)
                .ok_or_else(|| LogError::MissingColumn(name.to_string()))
        };
        let case = field(case_col, &mapping.case)?;
        let label = field(activity_col, &mapping.activity)?;
        if is_reserved_label(label) {
            return Err(LogError::ReservedLabel { label: label.to_string() });
        }
        let key = match time_col {
            Some(col) => {
                let raw = field(col, mapping.timestamp.as_deref().unwrap_or_default())?;
                parse_timestamp(raw).ok_or_else(|| LogError::Timestamp { row: row + 1, value: raw.to_string() })?
            }
            None => 0,
        };
        let slot = match case_index.get(case) {
            Some(&i) => i,
            None => {
                case_index.insert(case.to_string(), cases.len());
                cases.push(Vec::new());
                cases.len() - 1
            }
        };
        cases[slot].push((key, ActivityId::intern(label)));
    }

    let mut builder = EventLogBuilder::default();
    for mut events in cases {
        // stable: ties keep input order
        events.sort_by_key(|(t, _)| *t);
        let raw: Vec<ActivityId> = events.into_iter().map(|(_, a)| a).collect();
        builder.push_raw(&raw, 1)?;
    }
    builder.build()
}

/// Parses a timestamp into nanoseconds since the Unix epoch. Bare numbers
/// are read as seconds.
fn parse_timestamp(raw: &str) -> Option<i128> {
    if let Ok(n) = raw.parse::<i64>() {
        return Some(n as i128 * 1_000_000_000);
    }
    if let Ok(x) = raw.parse::<f64>() {
        return x.is_finite().then(|| (x * 1e9).round() as i128);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return dt.timestamp_nanos_opt().map(i128::from);
    }
    const FORMATS: [&str; 4] = ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f", "%Y/%m/%d %H:%M:%S%.f", "%d-%m-%Y %H:%M:%S%.f"];
    for fmt in FORMATS {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return dt.and_utc().timestamp_nanos_opt().map(i128::from);
        }
    }
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .and_then(|dt| dt.and_utc().timestamp_nanos_opt())
        .map(i128::from)
}

/// Writes one row per event with columns `case,activity,timestamp`. Cases
/// are numbered from 1 and timestamps count seconds within each case.
pub fn write_csv<W: std::io::Write>(log: &EventLog, out: W) -> Result<(), LogError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["case", "activity", "timestamp"])?;
    let mut case = 0u64;
    for v in log.variants() {
        for _ in 0..v.count {
            case += 1;
            let id = case.to_string();
            for (t, a) in v.trace.inner().iter().enumerate() {
                w.write_record([id.as_str(), &a.name(), &t.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
