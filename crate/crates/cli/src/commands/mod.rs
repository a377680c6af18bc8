mod aggregate;
mod calibrate;
mod forecast;
mod generate;
mod presets;
mod report;
mod simulate;

use std::path::Path;

use anyhow::{Context, Result};
use cachecast::config;
use cachecast::simulate::{default_socal_federation, FederationSpec};
use cachecast::trace::{parse_trace, Trace, TraceFormat};

use crate::args::{Cli, Command};
use crate::exit;
use crate::manifest::RunManifest;

pub fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build().context("cannot start worker threads")?;
    pool.install(|| match &cli.command {
        Command::Generate(a) => generate::run(&cli, a),
        Command::Simulate(a) => simulate::run(&cli, a),
        Command::Aggregate(a) => aggregate::run(&cli, a),
        Command::Forecast(a) => forecast::run(&cli, a),
        Command::Report(a) => report::run(&cli, a),
        Command::Calibrate(a) => calibrate::run(&cli, a),
        Command::Presets(a) => presets::run(&cli, a),
    })
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| exit::unreadable(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = read_input(path)?;
    String::from_utf8(bytes).map_err(|_| exit::usage(format!("{} is not UTF-8 text", path.display())))
}

/// Reads and parses a trace, recording it as a manifest input.
fn load_trace(path: &Path, manifest: &mut RunManifest) -> Result<Trace> {
    let bytes = read_input(path)?;
    manifest.input(path, &bytes);
    let trace = parse_trace(bytes.as_slice(), TraceFormat::from_path(path), &path.display().to_string())
        .with_context(|| format!("invalid trace {}", path.display()))?;
    Ok(trace)
}

fn load_federation(config_path: Option<&Path>, socal_scale: f64, manifest: &mut RunManifest) -> Result<FederationSpec> {
    match config_path {
        Some(path) => {
            let text = read_text(path)?;
            manifest.config(path, text.as_bytes());
            Ok(config::parse_federation(&text, path)?)
        }
        None => {
            check_scale(socal_scale)?;
            Ok(default_socal_federation(socal_scale))
        }
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale <= 1.0 {
        Ok(())
    } else {
        Err(exit::usage(format!("--socal-scale must be in (0, 1], got {scale}")))
    }
}

fn trace_file_name(format: TraceFormat, stem: &str) -> String {
    match format {
        TraceFormat::Csv => format!("{stem}.csv"),
        TraceFormat::JsonLines => format!("{stem}.jsonl"),
    }
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}
