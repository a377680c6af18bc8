use cachecast::aggregate::{bin_trace, Granularity};
use cachecast::simulate::{default_socal_federation, simulate, socal_partition_policy};
use cachecast::trace::{parse_trace, trace_to_bytes, TraceFormat};
use cachecast::workload::{default_socal_workload, generate};
use cachecast_bench::{requests, resolved};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

const SCALE: f64 = 1e-3;

fn bench_generate(c: &mut Criterion) {
    let spec = default_socal_workload(SCALE);
    c.bench_function("generate/socal_1e-3", |b| b.iter(|| generate(&spec).unwrap()));
}

fn bench_simulate(c: &mut Criterion) {
    let trace = requests(SCALE);
    let mut group = c.benchmark_group("simulate");
    group.throughput(Throughput::Elements(trace.len() as u64));
    for (name, fed) in [
        ("unified", default_socal_federation(SCALE)),
        ("partitioned", default_socal_federation(SCALE).with_policy(socal_partition_policy())),
    ] {
        group.bench_function(name, |b| b.iter(|| simulate(&trace, &fed).unwrap()));
    }
    group.finish();
}

fn bench_aggregate(c: &mut Criterion) {
    let trace = resolved(SCALE);
    let mut group = c.benchmark_group("bin_trace");
    group.throughput(Throughput::Elements(trace.len() as u64));
    group.bench_function("hourly", |b| b.iter(|| bin_trace(&trace, Granularity::Hourly).unwrap()));
    group.bench_function("daily", |b| b.iter(|| bin_trace(&trace, Granularity::Daily).unwrap()));
    group.finish();
}

fn bench_codec(c: &mut Criterion) {
    let trace = resolved(SCALE);
    let mut group = c.benchmark_group("trace_codec");
    group.throughput(Throughput::Elements(trace.len() as u64));
    for format in [TraceFormat::JsonLines, TraceFormat::Csv] {
        let bytes = trace_to_bytes(&trace, format);
        group.bench_function(format!("write/{format:?}"), |b| b.iter(|| trace_to_bytes(&trace, format)));
        group.bench_function(format!("parse/{format:?}"), |b| {
            b.iter_batched(
                || bytes.clone(),
                |bytes| parse_trace(bytes.as_slice(), format, "bench").unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, bench_generate, bench_simulate, bench_aggregate, bench_codec);
criterion_main!(benches);
