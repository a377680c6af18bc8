//! Canonical JSON Lines and CSV encodings of access records.
//!
//! Both encodings are streaming: [`TraceReader`] holds one record at a time and
//! [`TraceWriter`] emits records as they are handed over.

use std::io::{self, BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::record::{AccessRecord, Outcome, Trace};
use super::validate::{record_violations, Rule};
use crate::time::Timestamp;

pub const CSV_HEADER: [&str; 7] = ["ts", "file_id", "file_class", "size_bytes", "outcome", "transfer_seconds", "node_id"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceFormat {
    JsonLines,
    Csv,
}

impl TraceFormat {
    /// Guesses the format from a file extension, defaulting to JSON Lines.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => TraceFormat::Csv,
            _ => TraceFormat::JsonLines,
        }
    }
}

impl FromStr for TraceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "jsonlines" | "json-lines" => Ok(TraceFormat::JsonLines),
            "csv" => Ok(TraceFormat::Csv),
            other => Err(format!("unknown trace format {other:?} (expected jsonl or csv)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: timestamp earlier than the previous record")]
    NonMonotonicTimestamp { line: usize },
    #[error("line {line}: {field}: {rule}")]
    InvariantViolation { line: usize, field: &'static str, rule: Rule },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl TraceError {
    pub fn line(&self) -> Option<usize> {
        match self {
            TraceError::MalformedLine { line, .. }
            | TraceError::NonMonotonicTimestamp { line }
            | TraceError::InvariantViolation { line, .. } => Some(*line),
            TraceError::Io(_) => None,
        }
    }
}

/// Field order here is the canonical JSONL field order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRecord {
    ts: Timestamp,
    file_id: String,
    file_class: String,
    size_bytes: u64,
    outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transfer_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    node_id: Option<String>,
}

impl From<JsonRecord> for AccessRecord {
    fn from(r: JsonRecord) -> Self {
        AccessRecord {
            ts: r.ts,
            file_id: r.file_id,
            file_class: r.file_class,
            size_bytes: r.size_bytes,
            outcome: r.outcome,
            transfer_seconds: r.transfer_seconds,
            node_id: r.node_id,
        }
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    ryu::Buffer::new().format(v).to_owned()
}

enum Source<R> {
    Json { input: R, line: usize, buf: String },
    Csv { input: csv::Reader<R>, header_checked: bool, record: csv::StringRecord },
}

/// Streaming parser that validates each record and timestamp monotonicity.
pub struct TraceReader<R> {
    source: Source<R>,
    last_ts: Option<Timestamp>,
    failed: bool,
}

impl<R: BufRead> TraceReader<R> {
    pub fn new(input: R, format: TraceFormat) -> Self {
        let source = match format {
            TraceFormat::JsonLines => Source::Json { input, line: 0, buf: String::new() },
            TraceFormat::Csv => Source::Csv {
                input: csv::ReaderBuilder::new().has_headers(false).flexible(false).from_reader(input),
                header_checked: false,
                record: csv::StringRecord::new(),
            },
        };
        TraceReader { source, last_ts: None, failed: false }
    }

    fn next_raw(&mut self) -> Option<Result<(usize, AccessRecord), TraceError>> {
        match &mut self.source {
            Source::Json { input, line, buf } => loop {
                buf.clear();
                match input.read_line(buf) {
                    Ok(0) => return None,
                    Ok(_) => {}
                    Err(e) => return Some(Err(e.into())),
                }
                *line += 1;
                let text = buf.trim_end_matches(['\n', '\r']);
                if text.trim().is_empty() {
                    continue;
                }
                let parsed = serde_json::from_str::<JsonRecord>(text)
                    .map(|r| (*line, r.into()))
                    .map_err(|e| TraceError::MalformedLine { line: *line, reason: e.to_string() });
                return Some(parsed);
            },
            Source::Csv { input, header_checked, record } => loop {
                match input.read_record(record) {
                    Ok(false) => return None,
                    Ok(true) => {}
                    Err(e) => {
                        let line = e.position().map_or(0, |p| p.line() as usize);
                        return Some(Err(match e.into_kind() {
                            csv::ErrorKind::Io(io) => TraceError::Io(io),
                            other => TraceError::MalformedLine { line, reason: format!("{other:?}") },
                        }));
                    }
                }
                let line = record.position().map_or(0, |p| p.line() as usize);
                if !*header_checked {
                    *header_checked = true;
                    if record.iter().ne(CSV_HEADER.iter().copied()) {
                        return Some(Err(TraceError::MalformedLine {
                            line,
                            reason: format!("expected header {:?}", CSV_HEADER.join(",")),
                        }));
                    }
                    continue;
                }
                return Some(csv_record(record).map(|r| (line, r)).map_err(|reason| TraceError::MalformedLine { line, reason }));
            },
        }
    }
}

fn csv_record(rec: &csv::StringRecord) -> Result<AccessRecord, String> {
    if rec.len() != CSV_HEADER.len() {
        return Err(format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()));
    }
    let optional = |s: &str| (!s.is_empty()).then(|| s.to_owned());
    let transfer_seconds = match &rec[5] {
        "" => None,
        s => Some(s.parse::<f64>().map_err(|e| format!("transfer_seconds: {e}"))?),
    };
    Ok(AccessRecord {
        ts: Timestamp::parse_rfc3339(&rec[0]).map_err(|e| format!("ts: {e}"))?,
        file_id: rec[1].to_owned(),
        file_class: rec[2].to_owned(),
        size_bytes: rec[3].parse().map_err(|e| format!("size_bytes: {e}"))?,
        outcome: rec[4].parse().map_err(|e| format!("outcome: {e}"))?,
        transfer_seconds,
        node_id: optional(&rec[6]),
    })
}

impl<R: BufRead> Iterator for TraceReader<R> {
    type Item = Result<AccessRecord, TraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let item = self.next_raw()?.and_then(|(line, record)| {
            if let Some((field, rule)) = record_violations(&record).into_iter().next() {
                return Err(TraceError::InvariantViolation { line, field, rule });
            }
            if self.last_ts.is_some_and(|prev| record.ts < prev) {
                return Err(TraceError::NonMonotonicTimestamp { line });
            }
            self.last_ts = Some(record.ts);
            Ok(record)
        });
        self.failed = item.is_err();
        Some(item)
    }
}

/// Reads a whole trace, stopping at the first invalid line.
pub fn parse_trace<R: BufRead>(input: R, format: TraceFormat, source: &str) -> Result<Trace, TraceError> {
    let records = TraceReader::new(input, format).collect::<Result<Vec<_>, _>>()?;
    Ok(Trace::new(source, records))
}

enum Sink<W: Write> {
    Json(W),
    Csv { out: Box<csv::Writer<W>>, header_written: bool },
}

/// Streaming writer for the canonical encodings. CSV output always starts
/// with the header, so an empty trace is a header-only file.
pub struct TraceWriter<W: Write> {
    sink: Sink<W>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W, format: TraceFormat) -> Self {
        let sink = match format {
            TraceFormat::JsonLines => Sink::Json(out),
            TraceFormat::Csv => Sink::Csv {
                out: Box::new(
                    csv::WriterBuilder::new().has_headers(false).quote_style(csv::QuoteStyle::Necessary).from_writer(out),
                ),
                header_written: false,
            },
        };
        TraceWriter { sink }
    }

    pub fn write(&mut self, r: &AccessRecord) -> io::Result<()> {
        match &mut self.sink {
            Sink::Json(out) => {
                let wire = JsonRecord {
                    ts: r.ts,
                    file_id: r.file_id.clone(),
                    file_class: r.file_class.clone(),
                    size_bytes: r.size_bytes,
                    outcome: r.outcome,
                    transfer_seconds: r.transfer_seconds,
                    node_id: r.node_id.clone(),
                };
                serde_json::to_writer(&mut *out, &wire).map_err(io::Error::other)?;
                out.write_all(b"\n")
            }
            Sink::Csv { out, header_written } => {
                if !*header_written {
                    out.write_record(CSV_HEADER).map_err(csv_io)?;
                    *header_written = true;
                }
                let size = r.size_bytes.to_string();
                let transfer = r.transfer_seconds.map(format_f64).unwrap_or_default();
                let ts = r.ts.to_string();
                out.write_record([
                    ts.as_str(),
                    &r.file_id,
                    &r.file_class,
                    &size,
                    r.outcome.as_str(),
                    &transfer,
                    r.node_id.as_deref().unwrap_or(""),
                ])
                .map_err(csv_io)
            }
        }
    }

    pub fn finish(self) -> io::Result<W> {
        match self.sink {
            Sink::Json(mut out) => {
                out.flush()?;
                Ok(out)
            }
            Sink::Csv { mut out, header_written } => {
                if !header_written {
                    out.write_record(CSV_HEADER).map_err(csv_io)?;
                }
                out.into_inner().map_err(|e| e.into_error())
            }
        }
    }
}

fn csv_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => io::Error::other(format!("{other:?}")),
    }
}

pub fn write_trace<W: Write>(trace: &Trace, format: TraceFormat, out: W) -> io::Result<W> {
    let mut writer = TraceWriter::new(out, format);
    for record in &trace.records {
        writer.write(record)?;
    }
    writer.finish()
}

pub fn trace_to_bytes(trace: &Trace, format: TraceFormat) -> Vec<u8> {
    write_trace(trace, format, Vec::new()).expect("writing to a Vec cannot fail")
}
