//! CSV encoding of bin series.

use std::io::{self, Read, Write};

use super::bins::{BinFeatures, Granularity};
use super::AggregateError;
use crate::time::Timestamp;
use crate::trace::format_f64;

pub const BINS_CSV_HEADER: [&str; 10] = [
    "bin_start",
    "granularity",
    "miss_count",
    "miss_bytes",
    "hit_count",
    "hit_bytes",
    "agg_miss_tput",
    "agg_hit_tput",
    "avg_miss_tput",
    "avg_hit_tput",
];

pub fn write_bins_csv<W: Write>(bins: &[BinFeatures], out: W) -> io::Result<W> {
    let mut w = csv::WriterBuilder::new().from_writer(out);
    let io_err = |e: csv::Error| io::Error::other(e.to_string());
    w.write_record(BINS_CSV_HEADER).map_err(io_err)?;
    for b in bins {
        w.write_record([
            b.bin_start.to_string(),
            b.granularity.to_string(),
            b.miss_count.to_string(),
            b.miss_bytes.to_string(),
            b.hit_count.to_string(),
            b.hit_bytes.to_string(),
            format_f64(b.agg_miss_throughput),
            format_f64(b.agg_hit_throughput),
            format_f64(b.avg_miss_throughput),
            format_f64(b.avg_hit_throughput),
        ])
        .map_err(io_err)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

pub fn bins_to_csv_string(bins: &[BinFeatures]) -> String {
    String::from_utf8(write_bins_csv(bins, Vec::new()).expect("in-memory write")).expect("csv output is utf-8")
}

/// Parses a bins CSV, checking the header and that the rows form a regular grid.
pub fn read_bins_csv<R: Read>(input: R) -> Result<Vec<BinFeatures>, AggregateError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let malformed = |line: u64, reason: String| AggregateError::MalformedBins { line: line as usize, reason };
    let header = reader.headers().map_err(|e| malformed(1, e.to_string()))?;
    if header.iter().ne(BINS_CSV_HEADER.iter().copied()) {
        return Err(malformed(1, format!("expected header {:?}", BINS_CSV_HEADER.join(","))));
    }
    let mut bins = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| malformed(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let int = |i: usize| row[i].parse::<u64>().map_err(|e| malformed(line, format!("{}: {e}", BINS_CSV_HEADER[i])));
        let real = |i: usize| {
            row[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| malformed(line, format!("{}: expected a non-negative number", BINS_CSV_HEADER[i])))
        };
        bins.push(BinFeatures {
            bin_start: Timestamp::parse_rfc3339(&row[0]).map_err(|e| malformed(line, e.to_string()))?,
            granularity: row[1].parse::<Granularity>().map_err(|e| malformed(line, e))?,
            miss_count: int(2)?,
            miss_bytes: int(3)?,
            hit_count: int(4)?,
            hit_bytes: int(5)?,
            agg_miss_throughput: real(6)?,
            agg_hit_throughput: real(7)?,
            avg_miss_throughput: real(8)?,
            avg_hit_throughput: real(9)?,
        });
    }
    for w in bins.windows(2) {
        if w[1].granularity != w[0].granularity {
            return Err(AggregateError::MixedGranularity);
        }
        if w[1].bin_start.as_millis() - w[0].bin_start.as_millis() != w[0].granularity.period_millis() {
            return Err(AggregateError::IrregularGrid { at: w[1].bin_start });
        }
    }
    Ok(bins)
}
