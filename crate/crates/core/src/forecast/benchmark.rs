//! Seeded synthetic bin series used to check forecast skill.
//!
//! * [`sine_bins`]: noiseless daily sinusoids on every feature.
//! * [`campaign_bins`]: a year of hourly federation telemetry with a hot
//!   small-file class, a cold large-file class, a day/night cycle and a
//!   months-long large-file campaign.
//! * [`spiky_bins`]: a daily cycle with rare heavy-tailed throughput spikes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Pareto, Poisson};

use crate::aggregate::{BinFeatures, Granularity};
use crate::time::{Timestamp, MILLIS_PER_HOUR};
use crate::workload::{campaign_window, default_horizon_start};

const HOUR_SECONDS: f64 = 3600.0;

pub const CAMPAIGN_BENCHMARK_BINS: usize = 8760;
pub const SINE_BENCHMARK_BINS: usize = 2000;
pub const SPIKY_BENCHMARK_BINS: usize = 2000;

fn hourly_bin(i: usize, miss: (u64, u64, f64), hit: (u64, u64, f64)) -> BinFeatures {
    BinFeatures {
        bin_start: default_horizon_start().add_millis(i as i64 * MILLIS_PER_HOUR),
        granularity: Granularity::Hourly,
        miss_count: miss.0,
        miss_bytes: miss.1,
        hit_count: hit.0,
        hit_bytes: hit.1,
        agg_miss_throughput: miss.1 as f64 / HOUR_SECONDS,
        agg_hit_throughput: hit.1 as f64 / HOUR_SECONDS,
        avg_miss_throughput: if miss.0 > 0 { miss.2 } else { 0.0 },
        avg_hit_throughput: if hit.0 > 0 { hit.2 } else { 0.0 },
    }
}

/// Every feature follows a sinusoid of the given period (in bins).
pub fn sine_bins(n: usize, period: f64) -> Vec<BinFeatures> {
    (0..n)
        .map(|i| {
            let p = 2.0 * PI * i as f64 / period;
            let miss_count = (600.0 + 300.0 * p.sin()).round() as u64;
            let hit_count = (1200.0 + 500.0 * (p + 1.0).sin()).round() as u64;
            let miss_bytes = (miss_count as f64 * (4e8 + 1e8 * (p + 0.3).sin())).round() as u64;
            let hit_bytes = (hit_count as f64 * 3e7 * (1.0 + 0.2 * p.cos())).round() as u64;
            hourly_bin(i, (miss_count, miss_bytes, 2e8 + 8e7 * (p + 0.6).sin()), (hit_count, hit_bytes, 1.2e9 + 3e8 * p.cos()))
        })
        .collect()
}

fn poisson<R: Rng>(rng: &mut R, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        0
    } else {
        Poisson::new(lambda).expect("positive rate").sample(rng) as u64
    }
}

fn ramped(bytes: f64, count: u64, max_bps: f64) -> f64 {
    let mean = bytes / count.max(1) as f64;
    max_bps * mean / (mean + 1e9)
}

/// Smooth 0-to-1 campaign intensity with roughly two-day ramps.
fn campaign_intensity(t: Timestamp, start: Timestamp, end: Timestamp) -> f64 {
    let days = |a: Timestamp, b: Timestamp| (a.as_millis() - b.as_millis()) as f64 / (24.0 * MILLIS_PER_HOUR as f64);
    let logistic = |x: f64| 1.0 / (1.0 + (-2.0 * x).exp());
    logistic(days(t, start)) * logistic(days(end, t))
}

/// One year of hourly telemetry shaped like the reference federation.
pub fn campaign_bins(seed: u64) -> Vec<BinFeatures> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (campaign_start, campaign_end) = campaign_window();
    let size_noise = LogNormal::new(0.0, 0.05).expect("sigma");
    (0..CAMPAIGN_BENCHMARK_BINS)
        .map(|i| {
            let t = default_horizon_start().add_millis(i as i64 * MILLIS_PER_HOUR);
            let p = 2.0 * PI * (i % 24) as f64 / 24.0;
            let weekend = matches!((i / 24) % 7, 2 | 3);
            let c = campaign_intensity(t, campaign_start, campaign_end);
            // small-file analysis follows the working day; large-file jobs run overnight
            let small_rate = 790.0 * (1.0 - 0.35 * p.cos()) * if weekend { 0.8 } else { 1.0 };
            let large_rate = 88.0 * (1.0 + 0.5 * p.cos()) * (1.0 + 3.0 * c);
            let (small_hit, large_hit) = (0.76 - 0.08 * c, 0.35 - 0.2 * c);

            let sh = poisson(&mut rng, small_rate * small_hit);
            let sm = poisson(&mut rng, small_rate * (1.0 - small_hit));
            let lh = poisson(&mut rng, large_rate * large_hit);
            let lm = poisson(&mut rng, large_rate * (1.0 - large_hit));
            let mut bytes = |n: u64, mean: f64| n as f64 * mean * size_noise.sample(&mut rng);
            let (shb, smb, lhb, lmb) = (bytes(sh, 3e7), bytes(sm, 3e7), bytes(lh, 4.5e9), bytes(lm, 4.5e9));

            let mut avg = |n_s: u64, b_s: f64, n_l: u64, b_l: f64, max_bps: f64| {
                let n = n_s + n_l;
                if n == 0 {
                    return 0.0;
                }
                let jitter = LogNormal::new(0.0, 0.25 / (n as f64).sqrt()).expect("sigma").sample(&mut rng);
                (n_s as f64 * ramped(b_s, n_s, max_bps) + n_l as f64 * ramped(b_l, n_l, max_bps)) / n as f64 * jitter
            };
            let avg_miss = avg(sm, smb, lm, lmb, 5e8);
            let avg_hit = avg(sh, shb, lh, lhb, 2.5e9);
            hourly_bin(i, (sm + lm, (smb + lmb).round() as u64, avg_miss), (sh + lh, (shb + lhb).round() as u64, avg_hit))
        })
        .collect()
}

/// Daily-cycle telemetry whose average miss throughput carries rare
/// Pareto-tailed spikes.
pub fn spiky_bins(seed: u64, n: usize) -> Vec<BinFeatures> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spike = Pareto::new(5e7, 1.6).expect("shape");
    (0..n)
        .map(|i| {
            let p = 2.0 * PI * i as f64 / 24.0;
            let miss_rate = 400.0 * (1.0 + 0.3 * p.sin());
            let hit_rate = 900.0 * (1.0 + 0.3 * (p + 0.5).sin());
            let miss_count = poisson(&mut rng, miss_rate);
            let hit_count = poisson(&mut rng, hit_rate);
            let mut tput = 1e8 * (1.0 + 0.4 * p.sin()) * LogNormal::new(0.0, 0.05).expect("sigma").sample(&mut rng);
            if rng.random::<f64>() < 0.04 {
                tput += spike.sample(&mut rng);
            }
            let miss_bytes = miss_count * 200_000_000;
            let hit_bytes = hit_count * 30_000_000;
            hourly_bin(i, (miss_count, miss_bytes, tput), (hit_count, hit_bytes, 1e9 * (1.0 + 0.2 * p.cos())))
        })
        .collect()
}
