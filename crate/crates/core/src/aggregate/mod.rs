//! Time-series telemetry from resolved traces: hourly/daily feature bins,
//! hit-rate summaries and the series statistics used to score forecasts.

mod bins;
mod io;
mod stats;

use thiserror::Error;

use crate::time::Timestamp;

pub use bins::{bin_records, bin_trace, merge_bins, rollup, BinFeatures, Granularity, FEATURE_COUNT, FEATURE_NAMES};
pub use io::{bins_to_csv_string, read_bins_csv, write_bins_csv, BINS_CSV_HEADER};
pub use stats::{moving_average, per_transfer_throughput, rmse, std_dev, summarize, summarize_records, HitTally, SummaryStats};

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("trace contains no records")]
    EmptyTrace,
    #[error("record {index} has an unresolved outcome")]
    UnknownOutcomePresent { index: usize },
    #[error("transfer duration must be positive")]
    NonPositiveDuration,
    #[error("moving-average window must be at least 1")]
    ZeroWindow,
    #[error("series is empty")]
    EmptySeries,
    #[error("length mismatch: {predicted} predictions for {actual} actual values")]
    LengthMismatch { predicted: usize, actual: usize },
    #[error("sequences are empty")]
    EmptySequences,
    #[error("standard deviation needs at least 2 points, got {len}")]
    TooFewPoints { len: usize },
    #[error("bin series mixes granularities")]
    MixedGranularity,
    #[error("bin series is not on a regular grid at {at}")]
    IrregularGrid { at: Timestamp },
    #[error("bins line {line}: {reason}")]
    MalformedBins { line: usize, reason: String },
}
