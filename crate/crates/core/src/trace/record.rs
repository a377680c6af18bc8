use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::time::Timestamp;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Hit,
    Miss,
    /// Emitted by the workload generator before a simulator resolves it.
    Unknown,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Hit => "hit",
            Outcome::Miss => "miss",
            Outcome::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hit" => Ok(Outcome::Hit),
            "miss" => Ok(Outcome::Miss),
            "unknown" => Ok(Outcome::Unknown),
            other => Err(format!("unknown outcome {other:?}")),
        }
    }
}

/// One file request.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessRecord {
    pub ts: Timestamp,
    pub file_id: String,
    /// Open label set; "S" and "L" are the canonical small/large classes.
    pub file_class: String,
    pub size_bytes: u64,
    pub outcome: Outcome,
    /// Present iff `outcome` is Hit or Miss.
    pub transfer_seconds: Option<f64>,
    /// Present iff `outcome` is Hit or Miss.
    pub node_id: Option<String>,
}

impl AccessRecord {
    /// A generator-emitted request with no resolution yet.
    pub fn request(ts: Timestamp, file_id: impl Into<String>, file_class: impl Into<String>, size_bytes: u64) -> Self {
        AccessRecord {
            ts,
            file_id: file_id.into(),
            file_class: file_class.into(),
            size_bytes,
            outcome: Outcome::Unknown,
            transfer_seconds: None,
            node_id: None,
        }
    }

    pub fn resolved(&self, outcome: Outcome, node_id: impl Into<String>, transfer_seconds: f64) -> Self {
        AccessRecord { outcome, transfer_seconds: Some(transfer_seconds), node_id: Some(node_id.into()), ..self.clone() }
    }

    pub fn is_resolved(&self) -> bool {
        self.outcome != Outcome::Unknown
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub source: String,
    pub schema_version: u32,
}

impl TraceMetadata {
    pub fn new(source: impl Into<String>) -> Self {
        TraceMetadata { source: source.into(), schema_version: SCHEMA_VERSION }
    }
}

/// An ordered access log. Records are non-decreasing in `ts`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<AccessRecord>,
    pub metadata: TraceMetadata,
}

impl Default for Trace {
    fn default() -> Self {
        Trace::empty("")
    }
}

impl Trace {
    pub fn new(source: impl Into<String>, records: Vec<AccessRecord>) -> Self {
        Trace { records, metadata: TraceMetadata::new(source) }
    }

    pub fn empty(source: impl Into<String>) -> Self {
        Trace::new(source, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn total_bytes(&self) -> u64 {
        self.records.iter().map(|r| r.size_bytes).sum()
    }
}
