use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AggregateError;
use crate::time::{Timestamp, MILLIS_PER_DAY, MILLIS_PER_HOUR};
use crate::trace::{AccessRecord, Outcome, Trace};

pub const FEATURE_COUNT: usize = 8;

/// Names of the model features, in [`BinFeatures::features`] order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] =
    ["miss_count", "miss_bytes", "hit_count", "hit_bytes", "agg_miss_tput", "agg_hit_tput", "avg_miss_tput", "avg_hit_tput"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Hourly,
    Daily,
}

impl Granularity {
    pub fn period_millis(self) -> i64 {
        match self {
            Granularity::Hourly => MILLIS_PER_HOUR,
            Granularity::Daily => MILLIS_PER_DAY,
        }
    }

    pub fn seconds(self) -> f64 {
        (self.period_millis() / 1000) as f64
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::Hourly => "hourly",
            Granularity::Daily => "daily",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hourly" | "hour" | "h" => Ok(Granularity::Hourly),
            "daily" | "day" | "d" => Ok(Granularity::Daily),
            other => Err(format!("unknown granularity {other:?} (expected hourly or daily)")),
        }
    }
}

/// One time bin of federation-wide cache telemetry. Throughputs are bytes/s.
#[derive(Debug, Clone, PartialEq)]
pub struct BinFeatures {
    pub bin_start: Timestamp,
    pub granularity: Granularity,
    pub miss_count: u64,
    pub miss_bytes: u64,
    pub hit_count: u64,
    pub hit_bytes: u64,
    /// Miss bytes divided by the bin duration.
    pub agg_miss_throughput: f64,
    pub agg_hit_throughput: f64,
    /// Mean of per-transfer size/time over misses; 0 without misses.
    pub avg_miss_throughput: f64,
    pub avg_hit_throughput: f64,
}

impl BinFeatures {
    pub fn zero(bin_start: Timestamp, granularity: Granularity) -> Self {
        BinAccumulator::default().finish(bin_start, granularity)
    }

    /// The eight model inputs, ordered as [`FEATURE_NAMES`].
    pub fn features(&self) -> [f64; FEATURE_COUNT] {
        [
            self.miss_count as f64,
            self.miss_bytes as f64,
            self.hit_count as f64,
            self.hit_bytes as f64,
            self.agg_miss_throughput,
            self.agg_hit_throughput,
            self.avg_miss_throughput,
            self.avg_hit_throughput,
        ]
    }

    pub fn total_bytes(&self) -> u64 {
        self.hit_bytes + self.miss_bytes
    }

    pub fn total_count(&self) -> u64 {
        self.hit_count + self.miss_count
    }

    fn accumulator(&self) -> BinAccumulator {
        BinAccumulator {
            miss_count: self.miss_count,
            miss_bytes: self.miss_bytes,
            hit_count: self.hit_count,
            hit_bytes: self.hit_bytes,
            miss_tput_sum: self.avg_miss_throughput * self.miss_count as f64,
            hit_tput_sum: self.avg_hit_throughput * self.hit_count as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BinAccumulator {
    miss_count: u64,
    miss_bytes: u64,
    hit_count: u64,
    hit_bytes: u64,
    miss_tput_sum: f64,
    hit_tput_sum: f64,
}

impl BinAccumulator {
    fn add_record(&mut self, outcome: Outcome, size_bytes: u64, throughput: f64) {
        match outcome {
            Outcome::Hit => {
                self.hit_count += 1;
                self.hit_bytes += size_bytes;
                self.hit_tput_sum += throughput;
            }
            Outcome::Miss => {
                self.miss_count += 1;
                self.miss_bytes += size_bytes;
                self.miss_tput_sum += throughput;
            }
            Outcome::Unknown => unreachable!("unknown outcomes are rejected before binning"),
        }
    }

    fn merge(&mut self, other: &BinAccumulator) {
        self.miss_count += other.miss_count;
        self.miss_bytes += other.miss_bytes;
        self.hit_count += other.hit_count;
        self.hit_bytes += other.hit_bytes;
        self.miss_tput_sum += other.miss_tput_sum;
        self.hit_tput_sum += other.hit_tput_sum;
    }

    fn finish(self, bin_start: Timestamp, granularity: Granularity) -> BinFeatures {
        let secs = granularity.seconds();
        let mean = |sum: f64, n: u64| if n == 0 { 0.0 } else { sum / n as f64 };
        BinFeatures {
            bin_start,
            granularity,
            miss_count: self.miss_count,
            miss_bytes: self.miss_bytes,
            hit_count: self.hit_count,
            hit_bytes: self.hit_bytes,
            agg_miss_throughput: self.miss_bytes as f64 / secs,
            agg_hit_throughput: self.hit_bytes as f64 / secs,
            avg_miss_throughput: mean(self.miss_tput_sum, self.miss_count),
            avg_hit_throughput: mean(self.hit_tput_sum, self.hit_count),
        }
    }
}

/// Bins a resolved trace on a regular UTC-aligned grid. Bins run from the
/// bin containing the earliest record to the one containing the latest, and
/// empty interior bins are emitted as zero rows.
pub fn bin_trace(trace: &Trace, granularity: Granularity) -> Result<Vec<BinFeatures>, AggregateError> {
    bin_records(&trace.records, granularity)
}

pub fn bin_records(records: &[AccessRecord], granularity: Granularity) -> Result<Vec<BinFeatures>, AggregateError> {
    let period = granularity.period_millis();
    let (first, last) = match (records.iter().map(|r| r.ts).min(), records.iter().map(|r| r.ts).max()) {
        (Some(a), Some(b)) => (a.floor_to(period), b.floor_to(period)),
        _ => return Err(AggregateError::EmptyTrace),
    };
    let n_bins = ((last.as_millis() - first.as_millis()) / period + 1) as usize;
    let mut acc = vec![BinAccumulator::default(); n_bins];
    for (index, r) in records.iter().enumerate() {
        let transfer = match (r.outcome, r.transfer_seconds) {
            (Outcome::Unknown, _) => return Err(AggregateError::UnknownOutcomePresent { index }),
            (_, Some(t)) => t,
            (_, None) => return Err(AggregateError::NonPositiveDuration),
        };
        let throughput = super::per_transfer_throughput(r.size_bytes, transfer)?;
        let slot = ((r.ts.as_millis() - first.as_millis()).div_euclid(period)) as usize;
        acc[slot].add_record(r.outcome, r.size_bytes, throughput);
    }
    Ok(acc.into_iter().enumerate().map(|(i, a)| a.finish(first.add_millis(i as i64 * period), granularity)).collect())
}

fn check_series(bins: &[BinFeatures]) -> Result<Granularity, AggregateError> {
    let granularity = bins.first().ok_or(AggregateError::EmptySeries)?.granularity;
    let period = granularity.period_millis();
    for w in bins.windows(2) {
        if w[1].granularity != granularity {
            return Err(AggregateError::MixedGranularity);
        }
        if w[1].bin_start.as_millis() - w[0].bin_start.as_millis() != period {
            return Err(AggregateError::IrregularGrid { at: w[1].bin_start });
        }
    }
    Ok(granularity)
}

/// Element-wise merge of two binned shards of the same granularity. Counts
/// and bytes add; per-transfer averages recombine as count-weighted means.
/// The result spans both inputs with zero-filled gaps.
pub fn merge_bins(a: &[BinFeatures], b: &[BinFeatures]) -> Result<Vec<BinFeatures>, AggregateError> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Err(AggregateError::EmptySeries),
        (true, false) => return check_series(b).map(|_| b.to_vec()),
        (false, true) => return check_series(a).map(|_| a.to_vec()),
        _ => {}
    }
    let granularity = check_series(a)?;
    if check_series(b)? != granularity {
        return Err(AggregateError::MixedGranularity);
    }
    regrid(a.iter().chain(b), granularity)
}

/// Re-bins a regular series onto a coarser (or equal) grid, e.g. hourly to
/// daily. Coarse bins span only the periods touched by the input.
pub fn rollup(bins: &[BinFeatures], to: Granularity) -> Result<Vec<BinFeatures>, AggregateError> {
    let from = check_series(bins)?;
    if to.period_millis() < from.period_millis() {
        return Err(AggregateError::MixedGranularity);
    }
    regrid(bins.iter(), to)
}

fn regrid<'a>(bins: impl Iterator<Item = &'a BinFeatures> + Clone, to: Granularity) -> Result<Vec<BinFeatures>, AggregateError> {
    let period = to.period_millis();
    let first = bins.clone().map(|b| b.bin_start.floor_to(period)).min().ok_or(AggregateError::EmptySeries)?;
    let last = bins.clone().map(|b| b.bin_start.floor_to(period)).max().ok_or(AggregateError::EmptySeries)?;
    let n_bins = ((last.as_millis() - first.as_millis()) / period + 1) as usize;
    let mut acc = vec![BinAccumulator::default(); n_bins];
    for b in bins {
        let slot = ((b.bin_start.as_millis() - first.as_millis()).div_euclid(period)) as usize;
        acc[slot].merge(&b.accumulator());
    }
    Ok(acc.into_iter().enumerate().map(|(i, a)| a.finish(first.add_millis(i as i64 * period), to)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(h: i64, m: i64) -> Timestamp {
        Timestamp::from_ymd_hms(2021, 7, 1, 0, 0, 0).unwrap().add_millis(h * MILLIS_PER_HOUR + m * 60_000)
    }

    fn rec(ts: Timestamp, outcome: Outcome, size: u64, secs: f64) -> AccessRecord {
        AccessRecord::request(ts, "f", "S", size).resolved(outcome, "n0", secs)
    }

    #[test]
    fn three_hits_one_hour() {
        let t = Trace::new(
            "t",
            vec![
                rec(at(0, 1), Outcome::Hit, 10, 1.0),
                rec(at(0, 2), Outcome::Hit, 20, 1.0),
                rec(at(0, 3), Outcome::Hit, 30, 1.0),
            ],
        );
        let bins = bin_trace(&t, Granularity::Hourly).unwrap();
        assert_eq!(bins.len(), 1);
        assert_eq!(bins[0].bin_start, at(0, 0));
        assert_eq!((bins[0].hit_count, bins[0].hit_bytes), (3, 60));
        assert_eq!(bins[0].avg_hit_throughput, 20.0);
        assert_eq!(bins[0].agg_hit_throughput, 60.0 / 3600.0);
        assert_eq!(bins[0].avg_miss_throughput, 0.0);
    }

    #[test]
    fn interior_gaps_are_zero_filled() {
        let t = Trace::new("t", vec![rec(at(0, 30), Outcome::Miss, 5, 1.0), rec(at(3, 30), Outcome::Hit, 5, 1.0)]);
        let bins = bin_trace(&t, Granularity::Hourly).unwrap();
        assert_eq!(bins.len(), 4);
        assert_eq!(bins[1], BinFeatures::zero(at(1, 0), Granularity::Hourly));
        assert_eq!(bins[2], BinFeatures::zero(at(2, 0), Granularity::Hourly));
        let daily = bin_trace(&t, Granularity::Daily).unwrap();
        assert_eq!(daily.len(), 1);
        assert_eq!(daily[0].bin_start, at(0, 0));
    }

    #[test]
    fn rejects_unknown_and_empty() {
        let unknown = Trace::new("t", vec![AccessRecord::request(at(0, 0), "f", "S", 1)]);
        assert!(matches!(bin_trace(&unknown, Granularity::Hourly), Err(AggregateError::UnknownOutcomePresent { index: 0 })));
        assert!(matches!(bin_trace(&Trace::empty("t"), Granularity::Hourly), Err(AggregateError::EmptyTrace)));
    }

    #[test]
    fn rollup_hourly_to_daily() {
        let t = Trace::new(
            "t",
            vec![
                rec(at(1, 0), Outcome::Miss, 100, 4.0),
                rec(at(5, 0), Outcome::Miss, 50, 1.0),
                rec(at(30, 0), Outcome::Hit, 7, 1.0),
            ],
        );
        let hourly = bin_trace(&t, Granularity::Hourly).unwrap();
        let daily = bin_trace(&t, Granularity::Daily).unwrap();
        let rolled = rollup(&hourly, Granularity::Daily).unwrap();
        assert_eq!(rolled.len(), daily.len());
        for (r, d) in rolled.iter().zip(&daily) {
            assert_eq!(
                (r.bin_start, r.miss_count, r.miss_bytes, r.hit_count, r.hit_bytes),
                (d.bin_start, d.miss_count, d.miss_bytes, d.hit_count, d.hit_bytes)
            );
            assert!((r.avg_miss_throughput - d.avg_miss_throughput).abs() <= 1e-12 * d.avg_miss_throughput.abs().max(1.0));
        }
        assert!(rollup(&daily, Granularity::Hourly).is_err());
    }

    #[test]
    fn merge_rejects_irregular_input() {
        let mut bins = vec![BinFeatures::zero(at(0, 0), Granularity::Hourly), BinFeatures::zero(at(2, 0), Granularity::Hourly)];
        assert!(matches!(merge_bins(&bins, &[]), Err(AggregateError::IrregularGrid { .. })));
        bins[1].granularity = Granularity::Daily;
        assert!(merge_bins(&bins[..1], &bins[1..]).is_err());
    }
}
