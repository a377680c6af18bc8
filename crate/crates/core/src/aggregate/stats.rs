use serde::{Deserialize, Serialize};

use super::AggregateError;
use crate::trace::{AccessRecord, Outcome, Trace};

/// Achieved rate of a single transfer, in bytes per second.
pub fn per_transfer_throughput(size_bytes: u64, transfer_seconds: f64) -> Result<f64, AggregateError> {
    if transfer_seconds <= 0.0 || !transfer_seconds.is_finite() {
        return Err(AggregateError::NonPositiveDuration);
    }
    Ok(size_bytes as f64 / transfer_seconds)
}

/// Whole-trace hit accounting. File and byte hit rates diverge whenever large
/// files are reused less than small ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub total_accesses: u64,
    pub total_hits: u64,
    pub total_misses: u64,
    pub hit_bytes: u64,
    pub miss_bytes: u64,
    pub file_hit_rate: f64,
    pub byte_hit_rate: f64,
}

impl SummaryStats {
    pub fn from_totals(total_hits: u64, total_misses: u64, hit_bytes: u64, miss_bytes: u64) -> Result<Self, AggregateError> {
        let total_accesses = total_hits + total_misses;
        let total_bytes = hit_bytes + miss_bytes;
        if total_accesses == 0 || total_bytes == 0 {
            return Err(AggregateError::EmptyTrace);
        }
        Ok(SummaryStats {
            total_accesses,
            total_hits,
            total_misses,
            hit_bytes,
            miss_bytes,
            file_hit_rate: total_hits as f64 / total_accesses as f64,
            byte_hit_rate: hit_bytes as f64 / total_bytes as f64,
        })
    }

    pub fn total_bytes(&self) -> u64 {
        self.hit_bytes + self.miss_bytes
    }
}

/// Running hit/miss tallies that finalize into [`SummaryStats`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HitTally {
    pub hits: u64,
    pub misses: u64,
    pub hit_bytes: u64,
    pub miss_bytes: u64,
}

impl HitTally {
    pub fn record(&mut self, outcome: Outcome, size_bytes: u64) {
        match outcome {
            Outcome::Hit => {
                self.hits += 1;
                self.hit_bytes += size_bytes;
            }
            Outcome::Miss => {
                self.misses += 1;
                self.miss_bytes += size_bytes;
            }
            Outcome::Unknown => {}
        }
    }

    pub fn summary(&self) -> Result<SummaryStats, AggregateError> {
        SummaryStats::from_totals(self.hits, self.misses, self.hit_bytes, self.miss_bytes)
    }
}

pub fn summarize(trace: &Trace) -> Result<SummaryStats, AggregateError> {
    summarize_records(&trace.records)
}

pub fn summarize_records(records: &[AccessRecord]) -> Result<SummaryStats, AggregateError> {
    let mut tally = HitTally::default();
    for (index, r) in records.iter().enumerate() {
        if r.outcome == Outcome::Unknown {
            return Err(AggregateError::UnknownOutcomePresent { index });
        }
        tally.record(r.outcome, r.size_bytes);
    }
    tally.summary()
}

/// Trailing mean: `out[i]` averages `series[i+1-window ..= i]`, using the
/// shorter available prefix during warm-up.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>, AggregateError> {
    if window == 0 {
        return Err(AggregateError::ZeroWindow);
    }
    if series.is_empty() {
        return Err(AggregateError::EmptySeries);
    }
    if window == 1 {
        return Ok(series.to_vec());
    }
    Ok((0..series.len())
        .map(|i| {
            let slice = &series[(i + 1).saturating_sub(window)..=i];
            let mean = slice.iter().sum::<f64>() / slice.len() as f64;
            // rounding can push the mean a hair outside the window's range
            let (lo, hi) = slice.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            mean.clamp(lo, hi)
        })
        .collect())
}

pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64, AggregateError> {
    if predicted.len() != actual.len() {
        return Err(AggregateError::LengthMismatch { predicted: predicted.len(), actual: actual.len() });
    }
    if predicted.is_empty() {
        return Err(AggregateError::EmptySequences);
    }
    let sse: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sse / predicted.len() as f64).sqrt())
}

/// Population standard deviation (divisor N).
pub fn std_dev(series: &[f64]) -> Result<f64, AggregateError> {
    if series.len() < 2 {
        return Err(AggregateError::TooFewPoints { len: series.len() });
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(var.sqrt())
}
