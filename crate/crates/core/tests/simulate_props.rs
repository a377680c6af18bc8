mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use cachecast::simulate::{
    default_socal_federation, rendezvous_score, route, simulate, socal_partition_policy, FederationSpec, NodeSpec, PolicySpec,
    Simulator,
};
use cachecast::time::Timestamp;
use cachecast::trace::{AccessRecord, Outcome, Trace};
use cachecast::workload::{default_socal_workload, generate};
use common::{request_stream, BruteLru};
use proptest::prelude::*;
use rand::Rng;

fn two_class_stream(seed: u64, n: usize) -> Trace {
    let mut r = common::rng(seed);
    let records = (0..n)
        .map(|i| {
            let large = r.random_bool(0.3);
            let (class, id) =
                if large { ("L", format!("L{}", r.random_range(0..200))) } else { ("S", format!("S{}", r.random_range(0..60))) };
            let h = cachecast::hash::stable_hash(&[id.as_bytes()]);
            let size = if large { 300 + h % 400 } else { 5 + h % 20 };
            AccessRecord::request(Timestamp::from_millis(i as i64 * 500), id, class, size)
        })
        .collect();
    Trace::new("two-class", records)
}

fn small_federation() -> FederationSpec {
    FederationSpec::unified(vec![
        NodeSpec::new("a", 3_000),
        NodeSpec::new("b", 1_500).with_watermarks(0.8, 0.6),
        NodeSpec::new("c", 800),
    ])
}

fn disjoint_partition() -> PolicySpec {
    let mut map = BTreeMap::new();
    map.insert("S".to_owned(), BTreeSet::from(["a".to_owned()]));
    map.insert("L".to_owned(), BTreeSet::from(["b".to_owned(), "c".to_owned()]));
    PolicySpec::Partitioned { partition_map: map, allow_overlap: false }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn capacity_safety_after_every_step(seed in any::<u64>(), partitioned in any::<bool>()) {
        let trace = two_class_stream(seed, 2_000);
        let mut fed = small_federation().with_seed(seed);
        if partitioned {
            fed = fed.with_policy(disjoint_partition());
        }
        let mut sim = Simulator::new(&fed).unwrap();
        for r in &trace.records {
            sim.step(r).unwrap();
            for node in sim.nodes() {
                prop_assert!(node.used_bytes() <= node.high_limit());
            }
        }
    }

    #[test]
    fn first_touch_never_hits_and_bytes_conserve(seed in any::<u64>()) {
        let trace = two_class_stream(seed, 2_000);
        let report = simulate(&trace, &small_federation()).unwrap();
        let mut seen = HashSet::new();
        let mut hit_bytes = 0;
        for r in &report.resolved.records {
            if seen.insert(r.file_id.clone()) {
                prop_assert_eq!(r.outcome, Outcome::Miss);
            }
            if r.outcome == Outcome::Hit {
                hit_bytes += r.size_bytes;
            }
        }
        prop_assert_eq!(report.wan_bytes, report.summary.miss_bytes);
        prop_assert_eq!(report.wan_bytes + hit_bytes, trace.total_bytes());
        prop_assert!(report.pollution_evictions <= report.evictions_total);
    }

    #[test]
    fn single_node_matches_reference_lru(seed in any::<u64>(), high in 0.5f64..1.0, gap in 0.0f64..0.4) {
        let low = (high - gap).max(0.1);
        let trace = Trace::new("lru", request_stream(seed, 3_000, 80, 60));
        let fed = FederationSpec::unified(vec![NodeSpec::new("only", 1_000).with_watermarks(high, low)]);
        let report = simulate(&trace, &fed).unwrap();
        let mut oracle = BruteLru::new(1_000, high, low);
        for r in &report.resolved.records {
            prop_assert_eq!(r.outcome, oracle.access(&r.file_id, r.size_bytes));
        }
    }

    #[test]
    fn partitions_isolate_classes(seed in any::<u64>()) {
        let fed = small_federation().with_policy(disjoint_partition()).with_seed(seed);
        let report = simulate(&two_class_stream(seed, 3_000), &fed).unwrap();
        prop_assert_eq!(report.pollution_evictions, 0);
        for r in &report.resolved.records {
            let node = r.node_id.as_deref().unwrap();
            prop_assert_eq!(node == "a", r.file_class == "S");
        }
    }

    #[test]
    fn bypass_above_every_file_is_unified(seed in any::<u64>()) {
        let trace = two_class_stream(seed, 1_500);
        let unified = simulate(&trace, &small_federation().with_seed(seed)).unwrap();
        let bypass = small_federation()
            .with_seed(seed)
            .with_policy(PolicySpec::Bypass { bypass_threshold_bytes: 10_000 });
        prop_assert_eq!(simulate(&trace, &bypass).unwrap(), unified);
    }

    #[test]
    fn removing_an_unselected_node_keeps_routes(files in prop::collection::vec("[a-z0-9]{1,10}", 1..50), weights in prop::collection::vec(1u64..100, 2..8)) {
        let nodes: Vec<NodeSpec> = weights.iter().enumerate().map(|(i, &w)| NodeSpec::new(format!("n{i}"), w)).collect();
        let full = FederationSpec::unified(nodes.clone());
        for f in &files {
            let owner = route(f, "S", &full).unwrap().to_owned();
            let brute = nodes
                .iter()
                .max_by(|a, b| {
                    rendezvous_score(&a.node_id, a.capacity_bytes as f64, f)
                        .total_cmp(&rendezvous_score(&b.node_id, b.capacity_bytes as f64, f))
                })
                .unwrap();
            prop_assert_eq!(&owner, &brute.node_id);
            for drop in nodes.iter().filter(|n| n.node_id != owner) {
                let rest: Vec<NodeSpec> = nodes.iter().filter(|n| n.node_id != drop.node_id).cloned().collect();
                let reduced = FederationSpec::unified(rest);
                prop_assert_eq!(route(f, "S", &reduced).unwrap(), owner.as_str());
            }
        }
    }
}

#[test]
fn simulation_is_deterministic() {
    let trace = generate(&default_socal_workload(1e-4)).unwrap();
    let fed = default_socal_federation(1e-4).with_seed(99);
    let a = simulate(&trace, &fed).unwrap();
    let b = simulate(&trace, &fed).unwrap();
    assert_eq!(a, b);
    let bits = |r: &cachecast::simulate::SimulationReport| -> Vec<u64> {
        r.resolved.records.iter().map(|x| x.transfer_seconds.unwrap().to_bits()).collect()
    };
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn three_to_one_weights_split_three_to_one() {
    let fed = FederationSpec::unified(vec![NodeSpec::new("big", 3_000), NodeSpec::new("small", 1_000)]);
    let n = 100_000;
    let big = (0..n).filter(|i| route(&format!("file-{i:x}"), "S", &fed).unwrap() == "big").count();
    let share = big as f64 / n as f64;
    assert!((share - 0.75).abs() <= 0.02, "{share}");
}

#[test]
fn partitioned_campaign_protects_small_files() {
    let scale = 1e-3;
    let trace = generate(&default_socal_workload(scale)).unwrap();
    let unified = simulate(&trace, &default_socal_federation(scale)).unwrap();
    let partitioned = simulate(&trace, &default_socal_federation(scale).with_policy(socal_partition_policy())).unwrap();
    assert_eq!(partitioned.pollution_evictions, 0);
    assert!(unified.pollution_evictions > 0);
    assert!(partitioned.class_misses("S") < unified.class_misses("S"));
}
