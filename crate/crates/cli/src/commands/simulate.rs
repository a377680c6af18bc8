use anyhow::Result;
use cachecast::simulate::{simulate, socal_partition_policy, FederationSpec, PolicySpec, SimulationReport};
use cachecast::trace::{format_f64, trace_to_bytes, TraceFormat};
use rayon::prelude::*;
use serde::Serialize;

use super::{csv_bytes, load_federation, load_trace, trace_file_name};
use crate::args::{Cli, PolicyArg, SimulateArgs};
use crate::manifest::RunManifest;

pub const REPORT_FILE: &str = "report.json";
pub const COMPARISON_FILE: &str = "comparison.csv";

#[derive(Serialize)]
struct ReportDoc<'a> {
    policy: &'static str,
    rng_seed: u64,
    #[serde(flatten)]
    report: &'a SimulationReport,
}

fn with_policy(base: &FederationSpec, policy: PolicyArg, bypass_threshold: u64) -> FederationSpec {
    let spec = match policy {
        PolicyArg::Unified => PolicySpec::Unified,
        PolicyArg::Partitioned => match &base.policy {
            p @ PolicySpec::Partitioned { .. } => p.clone(),
            _ => socal_partition_policy(),
        },
        PolicyArg::Bypass => PolicySpec::Bypass { bypass_threshold_bytes: bypass_threshold },
    };
    base.clone().with_policy(spec)
}

fn per_class_rows(report: &SimulationReport) -> Vec<Vec<String>> {
    std::iter::once(("all", &report.summary))
        .chain(report.per_class_summary.iter().map(|(c, s)| (c.as_str(), s)))
        .map(|(class, s)| {
            vec![
                class.to_owned(),
                s.total_accesses.to_string(),
                s.total_hits.to_string(),
                s.total_misses.to_string(),
                s.hit_bytes.to_string(),
                s.miss_bytes.to_string(),
                format_f64(s.file_hit_rate),
                format_f64(s.byte_hit_rate),
            ]
        })
        .collect()
}

const SUMMARY_HEADER: [&str; 8] =
    ["class", "accesses", "hits", "misses", "hit_bytes", "miss_bytes", "file_hit_rate", "byte_hit_rate"];

pub fn run(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let mut manifest = RunManifest::new(&cli.out)?;
    let mut federation = load_federation(cli.config.as_deref(), args.socal_scale, &mut manifest)?;
    if let Some(seed) = cli.seed {
        federation.rng_seed = seed;
    }
    manifest.seed("federation", federation.rng_seed);
    let trace = load_trace(&args.trace, &mut manifest)?;
    let format: TraceFormat = args.format.into();

    let runs: Vec<(Option<PolicyArg>, FederationSpec)> = if args.policies.is_empty() {
        vec![(None, federation)]
    } else {
        let mut seen = Vec::new();
        for p in &args.policies {
            if !seen.contains(p) {
                seen.push(*p);
            }
        }
        seen.into_iter().map(|p| (Some(p), with_policy(&federation, p, args.bypass_threshold))).collect()
    };
    let reports =
        manifest.time("simulate", || runs.par_iter().map(|(_, fed)| simulate(&trace, fed)).collect::<Result<Vec<_>, _>>())?;

    let nested = runs.len() > 1;
    let mut comparison = Vec::new();
    for ((_, fed), report) in runs.iter().zip(&reports) {
        let prefix = if nested { format!("{}/", fed.policy.name()) } else { String::new() };
        let doc = ReportDoc { policy: fed.policy.name(), rng_seed: fed.rng_seed, report };
        let mut json = serde_json::to_string_pretty(&doc)?;
        json.push('\n');
        manifest.write(&format!("{prefix}{REPORT_FILE}"), json.as_bytes())?;
        manifest.write(&format!("{prefix}summary.csv"), &csv_bytes(&SUMMARY_HEADER, per_class_rows(report))?)?;
        let bytes = trace_to_bytes(&report.resolved, format);
        manifest.write(&trace_file_name(format, &format!("{prefix}resolved")), &bytes)?;
        comparison.push(vec![
            fed.policy.name().to_owned(),
            format_f64(report.summary.file_hit_rate),
            format_f64(report.summary.byte_hit_rate),
            report.wan_bytes.to_string(),
            report.evictions_total.to_string(),
            report.pollution_evictions.to_string(),
            report.class_misses("S").to_string(),
            report.class_misses("L").to_string(),
        ]);
        eprintln!(
            "{}: file hit rate {:.4}, byte hit rate {:.4}, pollution evictions {}",
            fed.policy.name(),
            report.summary.file_hit_rate,
            report.summary.byte_hit_rate,
            report.pollution_evictions
        );
    }
    if nested {
        let header = [
            "policy",
            "file_hit_rate",
            "byte_hit_rate",
            "wan_bytes",
            "evictions_total",
            "pollution_evictions",
            "s_misses",
            "l_misses",
        ];
        manifest.write(COMPARISON_FILE, &csv_bytes(&header, comparison)?)?;
    }
    manifest.finish()?;
    Ok(())
}
