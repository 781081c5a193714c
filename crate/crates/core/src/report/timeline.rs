use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::ReportError;

/// Event fixture shipped with the crate: the November 2022 FTX sequence.
pub const FTX_2022_TIMELINE: &str = include_str!("../../fixtures/ftx_timeline.csv");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub label: String,
    /// UTC milliseconds.
    pub ts: i64,
    pub description: String,
}

/// Labelled events with unique labels and strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventTimeline {
    entries: Vec<Event>,
}

impl EventTimeline {
    pub fn new(entries: Vec<Event>) -> Result<Self, ReportError> {
        let mut labels = HashSet::new();
        for e in &entries {
            if e.label.is_empty() || !labels.insert(e.label.as_str()) {
                return Err(ReportError::Timeline(format!("label `{}` is empty or repeated", e.label)));
            }
        }
        if let Some(w) = entries.windows(2).find(|w| w[1].ts <= w[0].ts) {
            return Err(ReportError::Timeline(format!("`{}` does not follow `{}` in time", w[1].label, w[0].label)));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[Event] {
        &self.entries
    }

    /// Parses `label,ts,description` CSV; `ts` is RFC 3339 or integer milliseconds.
    pub fn from_csv(reader: impl Read) -> Result<Self, ReportError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut entries = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| ReportError::Timeline(format!("line {}: {e}", i + 2)))?;
            if rec.len() < 2 {
                return Err(ReportError::Timeline(format!("line {}: expected label,ts,description", i + 2)));
            }
            let ts = parse_instant(&rec[1]).map_err(|e| ReportError::Timeline(format!("line {}: {e}", i + 2)))?;
            entries.push(Event {
                label: rec[0].trim().to_string(),
                ts,
                description: rec.get(2).unwrap_or("").to_string(),
            });
        }
        Self::new(entries)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ReportError> {
        Self::from_csv(File::open(path)?)
    }

    pub fn ftx_2022() -> Self {
        Self::from_csv(FTX_2022_TIMELINE.as_bytes()).expect("bundled timeline is valid")
    }

    /// Labels of events in `[start, start + width)`, in time order.
    pub fn labels_in(&self, start: i64, width: i64) -> Vec<&str> {
        self.entries.iter().filter(|e| e.ts >= start && e.ts < start + width).map(|e| e.label.as_str()).collect()
    }
}

/// Accepts integer milliseconds, RFC 3339, `YYYY-MM-DD HH:MM` or `YYYY-MM-DD` (UTC).
pub fn parse_instant(s: &str) -> Result<i64, String> {
    let s = s.trim();
    if let Ok(ms) = s.parse::<i64>() {
        return Ok(ms);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.with_timezone(&Utc).timestamp_millis());
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%d %H:%M", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = chrono::NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt.and_utc().timestamp_millis());
        }
    }
    if let Ok(d) = chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp_millis());
    }
    Err(format!("cannot parse `{s}` as a timestamp"))
}
