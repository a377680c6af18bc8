use std::collections::{HashMap, HashSet};

use cachecast::aggregate::SummaryStats;
use cachecast::simulate::{default_socal_federation, simulate};
use cachecast::time::Timestamp;
use cachecast::trace::validate_trace;
use cachecast::workload::{
    calibrate, default_socal_workload, generate, popular_file_id, zipf_pmf, FileClassSpec, Horizon, WorkloadSpec,
};
use serde::Deserialize;

const SCALE: f64 = 1e-3;

fn single_class(population: u64, zipf: f64, rate: f64, hours: i64) -> WorkloadSpec {
    let start = Timestamp::from_ymd_hms(2021, 7, 1, 0, 0, 0).unwrap();
    WorkloadSpec {
        classes: vec![FileClassSpec {
            class_label: "S".into(),
            population,
            size_lognorm_mu: 10.0,
            size_lognorm_sigma: 1.0,
            zipf_exponent: zipf,
            request_rate_per_hour: rate,
        }],
        campaigns: vec![],
        horizon: Horizon { start, end: start.add_millis(hours * 3_600_000) },
        rng_seed: 5,
    }
}

#[test]
fn zipf_ranks_match_the_pmf() {
    let spec = single_class(1000, 1.0, 10_000.0, 100);
    let trace = generate(&spec).unwrap();
    assert!(trace.len() > 990_000, "{}", trace.len());
    let rank: HashMap<String, usize> = (1..=1000).map(|k| (popular_file_id("S", k), k as usize - 1)).collect();
    let mut counts = vec![0u64; 1000];
    for r in &trace.records {
        counts[rank[&r.file_id]] += 1;
    }
    let n = trace.len() as f64;
    let tv: f64 = 0.5 * zipf_pmf(1000, 1.0).iter().zip(&counts).map(|(p, &c)| (p - c as f64 / n).abs()).sum::<f64>();
    assert!(tv <= 0.02, "total variation {tv}");
}

#[test]
fn seeds_are_reproducible_and_distinct() {
    let spec = default_socal_workload(SCALE);
    let a = generate(&spec).unwrap();
    assert_eq!(a, generate(&spec).unwrap());
    let lens: HashSet<usize> = (0..4).map(|s| generate(&spec.clone().with_seed(s)).unwrap().len()).collect();
    assert!(lens.len() > 1);
    assert_ne!(a, generate(&spec.with_seed(77)).unwrap());
}

#[test]
fn sizes_are_fixed_per_file_and_trace_is_valid() {
    let trace = generate(&default_socal_workload(SCALE)).unwrap();
    assert!(validate_trace(&trace).is_empty());
    let mut sizes = HashMap::new();
    for r in &trace.records {
        assert_eq!(*sizes.entry(r.file_id.as_str()).or_insert(r.size_bytes), r.size_bytes, "{}", r.file_id);
    }
}

#[test]
fn request_counts_scale_with_rate() {
    let a = generate(&default_socal_workload(1e-2)).unwrap().len() as f64;
    let b = generate(&default_socal_workload(1e-3)).unwrap().len() as f64;
    assert!((b / a - 0.1).abs() < 0.01, "{}", b / a);
}

#[test]
fn pollution_grows_with_fresh_fraction() {
    let fed = default_socal_federation(SCALE);
    let pollution: Vec<u64> = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&f| {
            let mut spec = default_socal_workload(SCALE);
            spec.campaigns[0].fresh_fraction = f;
            simulate(&generate(&spec).unwrap(), &fed).unwrap().pollution_evictions
        })
        .collect();
    assert!(pollution.windows(2).all(|w| w[0] <= w[1]), "{pollution:?}");
}

#[derive(Deserialize)]
struct CalibrationFixture {
    small_zipf: f64,
    small_population_factor: f64,
    fresh_fraction: f64,
    budget: usize,
    achieved_file_hit_rate: f64,
    achieved_byte_hit_rate: f64,
    evaluations: usize,
}

#[test]
fn detuned_workload_calibrates_back_to_reference_rates() {
    let fx: CalibrationFixture = serde_json::from_str(include_str!("fixtures/calibration.json")).unwrap();
    let mut base = default_socal_workload(SCALE);
    let s = base.class_mut("S").unwrap();
    s.zipf_exponent = fx.small_zipf;
    s.population = (s.population as f64 * fx.small_population_factor).round() as u64;
    base.campaigns[0].fresh_fraction = fx.fresh_fraction;

    let targets = SummaryStats::from_totals(676, 324, 354, 646).unwrap();
    let out = calibrate(&targets, &base, &default_socal_federation(SCALE), fx.budget).unwrap();
    let (file, byte) = (out.achieved.file_hit_rate, out.achieved.byte_hit_rate);
    assert!((file - 0.676).abs() <= 0.05 && (byte - 0.354).abs() <= 0.05, "{file} {byte}");
    assert!(out.evaluations <= fx.budget);
    assert_eq!((file, byte, out.evaluations), (fx.achieved_file_hit_rate, fx.achieved_byte_hit_rate, fx.evaluations));
}
