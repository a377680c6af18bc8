#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use cachecast::aggregate::Granularity;
use cachecast::time::Timestamp;
use cachecast::trace::{AccessRecord, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Time-ordered resolved records spread over `span_hours`, with sizes and
/// durations spanning several orders of magnitude.
pub fn resolved_records(seed: u64, n: usize, span_hours: i64) -> Vec<AccessRecord> {
    let mut r = rng(seed);
    let start = Timestamp::from_ymd_hms(2021, 7, 1, 0, 0, 0).unwrap().as_millis();
    let mut ts: Vec<i64> = (0..n).map(|_| start + r.random_range(0..span_hours * 3_600_000)).collect();
    ts.sort_unstable();
    ts.into_iter()
        .map(|t| {
            let class = if r.random_bool(0.8) { "S" } else { "L" };
            let size = 10f64.powf(r.random_range(0.0..10.0)).round().max(1.0) as u64;
            let outcome = if r.random_bool(0.6) { Outcome::Hit } else { Outcome::Miss };
            let secs = 10f64.powf(r.random_range(-3.0..3.0));
            let node = format!("node-{}", r.random_range(0..5));
            AccessRecord::request(Timestamp::from_millis(t), format!("{class}-{}", r.random_range(0..500)), class, size)
                .resolved(outcome, node, secs)
        })
        .collect()
}

#[derive(Debug, Default, Clone, Copy)]
pub struct OracleBin {
    pub miss_count: u64,
    pub miss_bytes: u64,
    pub hit_count: u64,
    pub hit_bytes: u64,
    pub miss_tput: f64,
    pub hit_tput: f64,
}

/// Direct group-by on floored timestamps, keyed by bin start in ms.
pub fn group_by(records: &[AccessRecord], granularity: Granularity) -> BTreeMap<i64, OracleBin> {
    let period = granularity.period_millis();
    let mut out: BTreeMap<i64, OracleBin> = BTreeMap::new();
    for r in records {
        let key = r.ts.as_millis().div_euclid(period) * period;
        let b = out.entry(key).or_default();
        let tput = r.size_bytes as f64 / r.transfer_seconds.unwrap();
        match r.outcome {
            Outcome::Hit => {
                b.hit_count += 1;
                b.hit_bytes += r.size_bytes;
                b.hit_tput += tput;
            }
            Outcome::Miss => {
                b.miss_count += 1;
                b.miss_bytes += r.size_bytes;
                b.miss_tput += tput;
            }
            Outcome::Unknown => panic!("unresolved record"),
        }
    }
    out
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Reference LRU with high/low watermarks kept as a plain vector, least
/// recently used first.
pub struct BruteLru {
    high: u64,
    low: u64,
    entries: Vec<(String, u64)>,
}

impl BruteLru {
    pub fn new(capacity: u64, high: f64, low: f64) -> Self {
        BruteLru {
            high: (capacity as f64 * high).floor() as u64,
            low: (capacity as f64 * low).floor() as u64,
            entries: Vec::new(),
        }
    }

    pub fn used(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn access(&mut self, id: &str, size: u64) -> Outcome {
        if let Some(pos) = self.entries.iter().position(|e| e.0 == id) {
            let e = self.entries.remove(pos);
            self.entries.push(e);
            return Outcome::Hit;
        }
        if size > self.low {
            return Outcome::Miss;
        }
        if self.used() + size > self.high {
            while self.used() + size > self.low {
                self.entries.remove(0);
            }
        }
        self.entries.push((id.to_owned(), size));
        Outcome::Miss
    }
}

/// Random single-class requests over a small id space with sizes fixed per id.
pub fn request_stream(seed: u64, n: usize, ids: u64, max_size: u64) -> Vec<AccessRecord> {
    let mut r = rng(seed);
    let mut sizes: HashMap<u64, u64> = HashMap::new();
    (0..n)
        .map(|i| {
            let id = r.random_range(0..ids);
            let size = *sizes.entry(id).or_insert_with(|| r.random_range(1..=max_size));
            AccessRecord::request(Timestamp::from_millis(i as i64 * 1000), format!("f{id}"), "S", size)
        })
        .collect()
}
