use std::fmt;

use super::record::{AccessRecord, Outcome, Trace, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    EmptyFileId,
    EmptyNodeId,
    ZeroSize,
    /// transfer_seconds / node_id presence disagrees with the outcome.
    ResolutionMismatch,
    NonPositiveTransfer,
    NonMonotonicTimestamp,
    SchemaVersion,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::EmptyFileId => "file_id must be non-empty",
            Rule::EmptyNodeId => "node_id must be non-empty when present",
            Rule::ZeroSize => "size_bytes must be at least 1",
            Rule::ResolutionMismatch => "present iff outcome is hit or miss",
            Rule::NonPositiveTransfer => "transfer_seconds must be finite and positive",
            Rule::NonMonotonicTimestamp => "timestamps must be non-decreasing",
            Rule::SchemaVersion => "schema_version must be 1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Record index, or `None` for trace-level metadata.
    pub index: Option<usize>,
    pub field: &'static str,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "record {i}: {}: {}", self.field, self.rule),
            None => write!(f, "metadata: {}: {}", self.field, self.rule),
        }
    }
}

/// Field-level checks on a single record, independent of its neighbours.
pub fn record_violations(record: &AccessRecord) -> Vec<(&'static str, Rule)> {
    let mut out = Vec::new();
    if record.file_id.is_empty() {
        out.push(("file_id", Rule::EmptyFileId));
    }
    if record.size_bytes == 0 {
        out.push(("size_bytes", Rule::ZeroSize));
    }
    let unknown = record.outcome == Outcome::Unknown;
    match record.transfer_seconds {
        Some(_) if unknown => out.push(("transfer_seconds", Rule::ResolutionMismatch)),
        None if !unknown => out.push(("transfer_seconds", Rule::ResolutionMismatch)),
        Some(t) if !(t.is_finite() && t > 0.0) => out.push(("transfer_seconds", Rule::NonPositiveTransfer)),
        _ => {}
    }
    match &record.node_id {
        Some(_) if unknown => out.push(("node_id", Rule::ResolutionMismatch)),
        None if !unknown => out.push(("node_id", Rule::ResolutionMismatch)),
        Some(n) if n.is_empty() => out.push(("node_id", Rule::EmptyNodeId)),
        _ => {}
    }
    out
}

/// Returns every invariant violation in the trace; empty iff valid.
pub fn validate_trace(trace: &Trace) -> Vec<Violation> {
    let mut out = Vec::new();
    if trace.metadata.schema_version != SCHEMA_VERSION {
        out.push(Violation { index: None, field: "schema_version", rule: Rule::SchemaVersion });
    }
    for (i, record) in trace.records.iter().enumerate() {
        if i > 0 && record.ts < trace.records[i - 1].ts {
            out.push(Violation { index: Some(i), field: "ts", rule: Rule::NonMonotonicTimestamp });
        }
        out.extend(record_violations(record).into_iter().map(|(field, rule)| Violation { index: Some(i), field, rule }));
    }
    out
}
