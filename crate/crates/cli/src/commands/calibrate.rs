use anyhow::Result;
use cachecast::aggregate::SummaryStats;
use cachecast::config::{self, to_toml_string};
use cachecast::time::MILLIS_PER_DAY;
use cachecast::workload::{calibrate_with, default_socal_workload, CalibrationOptions, CalibrationStatus};
use serde::Serialize;

use super::{check_scale, load_federation, read_text};
use crate::args::{CalibrateArgs, Cli};
use crate::exit;
use crate::manifest::RunManifest;

#[derive(Serialize)]
struct CalibrationDoc<'a> {
    status: CalibrationStatus,
    evaluations: usize,
    target_file_hit_rate: f64,
    target_byte_hit_rate: f64,
    achieved: &'a SummaryStats,
}

pub fn run(cli: &Cli, args: &CalibrateArgs) -> Result<()> {
    let mut manifest = RunManifest::new(&cli.out)?;
    let mut base = match &cli.config {
        Some(path) => {
            let text = read_text(path)?;
            manifest.config(path, text.as_bytes());
            config::parse_workload(&text, path)?
        }
        None => {
            check_scale(args.socal_scale)?;
            default_socal_workload(args.socal_scale)
        }
    };
    if let Some(seed) = cli.seed {
        base.rng_seed = seed;
    }
    manifest.seed("workload", base.rng_seed);
    let federation = load_federation(args.federation.as_deref(), args.socal_scale, &mut manifest)?;
    manifest.seed("federation", federation.rng_seed);
    for (name, v) in [("--file-hit-rate", args.file_hit_rate), ("--byte-hit-rate", args.byte_hit_rate)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(exit::usage(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    if args.tolerance.is_nan() || args.tolerance <= 0.0 || args.warmup_days.is_nan() || args.warmup_days < 0.0 {
        return Err(exit::usage("--tolerance must be positive and --warmup-days non-negative"));
    }
    let mut targets = SummaryStats::from_totals(1, 1, 1, 1)?;
    targets.file_hit_rate = args.file_hit_rate;
    targets.byte_hit_rate = args.byte_hit_rate;
    let options = CalibrationOptions {
        tolerance: args.tolerance,
        warmup_millis: (args.warmup_days * MILLIS_PER_DAY as f64).round() as i64,
        ..Default::default()
    };
    let outcome = manifest.time("calibrate", || calibrate_with(&targets, &base, &federation, args.budget, options))?;
    manifest.write("calibrated.toml", to_toml_string(&outcome.spec)?.as_bytes())?;
    let doc = CalibrationDoc {
        status: outcome.status,
        evaluations: outcome.evaluations,
        target_file_hit_rate: args.file_hit_rate,
        target_byte_hit_rate: args.byte_hit_rate,
        achieved: &outcome.achieved,
    };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');
    manifest.write("calibration.json", json.as_bytes())?;
    manifest.finish()?;
    eprintln!(
        "{:?} after {} simulations: file hit rate {:.4}, byte hit rate {:.4}",
        outcome.status, outcome.evaluations, outcome.achieved.file_hit_rate, outcome.achieved.byte_hit_rate
    );
    Ok(())
}
