//! Canonical access-record schema: types, validation and serialization.

mod codec;
mod record;
mod validate;

pub use codec::{
    format_f64, parse_trace, trace_to_bytes, write_trace, TraceError, TraceFormat, TraceReader, TraceWriter, CSV_HEADER,
};
pub use record::{AccessRecord, Outcome, Trace, TraceMetadata, SCHEMA_VERSION};
pub use validate::{record_violations, validate_trace, Rule, Violation};
