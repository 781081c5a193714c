use std::fs;
use std::path::Path;

use super::timeline::EventTimeline;
use super::{csv_writer, ReportError};

const TS_COLUMNS: [&str; 4] = ["ts", "window_end_ts", "bucket_start_ts", "timestamp"];

/// Appends an `event` column to a timestamped CSV.
///
/// The row timestamp is taken from the first of `ts`, `window_end_ts`,
/// `bucket_start_ts`, `timestamp` present in the header (else column 0),
/// and a row covers `[ts, ts + bucket_ms)`. Events in the same row are
/// joined with `;` in time order.
pub fn annotate(csv_text: &str, timeline: &EventTimeline, bucket_ms: i64) -> Result<String, ReportError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(csv_text.as_bytes());
    let header = rdr.headers().map_err(|e| ReportError::Annotate(e.to_string()))?.clone();
    let ts_col = TS_COLUMNS.iter().find_map(|c| header.iter().position(|h| h == *c)).unwrap_or(0);

    let mut out = csv_writer(Vec::new());
    let mut head: Vec<&str> = header.iter().collect();
    head.push("event");
    out.write_record(&head).map_err(|e| ReportError::Annotate(e.to_string()))?;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ReportError::Annotate(format!("line {}: {e}", i + 2)))?;
        let ts: i64 = rec
            .get(ts_col)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| ReportError::Annotate(format!("line {}: no integer timestamp in column {ts_col}", i + 2)))?;
        let labels = timeline.labels_in(ts, bucket_ms).join(";");
        let mut row: Vec<&str> = rec.iter().collect();
        row.push(&labels);
        out.write_record(&row).map_err(|e| ReportError::Annotate(e.to_string()))?;
    }
    let bytes = out.into_inner().map_err(|e| ReportError::Annotate(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Rewrites `path` in place with the `event` column appended.
pub fn annotate_file(path: &Path, timeline: &EventTimeline, bucket_ms: i64) -> Result<(), ReportError> {
    let text = fs::read_to_string(path)?;
    fs::write(path, annotate(&text, timeline, bucket_ms)?)?;
    Ok(())
}
