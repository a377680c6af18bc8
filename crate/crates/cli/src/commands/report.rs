use std::fmt::Write;
use std::path::Path;

use anyhow::Result;
use cachecast::aggregate::{bin_records, summarize_records, BinFeatures};
use cachecast::forecast::ForecastTarget;
use cachecast::time::Timestamp;

use super::forecast::{evaluation_csv_header, overlay_chart, prediction_file_stem, EVALUATION_FILE, PREDICTIONS_HEADER};
use super::{csv_bytes, load_trace, read_input};
use crate::args::{Cli, ReportArgs};
use crate::exit;
use crate::manifest::RunManifest;
use crate::svg::{Chart, Series};

fn ratio(a: u64, b: u64) -> f64 {
    a as f64 / b as f64
}

fn rate_rows(bins: &[BinFeatures]) -> (Vec<Timestamp>, [Vec<f64>; 4]) {
    let mut x = Vec::new();
    let mut cols: [Vec<f64>; 4] = Default::default();
    for b in bins.iter().filter(|b| b.total_count() > 0) {
        x.push(b.bin_start);
        let n = b.total_count();
        cols[0].push(ratio(b.hit_count, n));
        cols[1].push(ratio(b.miss_count, n));
        let bytes = b.total_bytes();
        let (bh, bm) = if bytes > 0 { (ratio(b.hit_bytes, bytes), ratio(b.miss_bytes, bytes)) } else { (0.0, 0.0) };
        cols[2].push(bh);
        cols[3].push(bm);
    }
    (x, cols)
}

fn csv_records(path: &Path, expected: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let bytes = read_input(path)?;
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let header = reader.headers().map_err(|e| exit::usage(format!("{}: {e}", path.display())))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(exit::usage(format!(
            "{}: schema mismatch: expected columns {}, found {}",
            path.display(),
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    reader.records().collect::<Result<Vec<_>, _>>().map_err(|e| exit::usage(format!("{}: {e}", path.display())))
}

fn parse_field<T: std::str::FromStr>(path: &Path, record: &csv::StringRecord, index: usize) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line());
    record
        .get(index)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| exit::usage(format!("{} line {line}: column {} is malformed", path.display(), index + 1)))
}

pub fn run(cli: &Cli, args: &ReportArgs) -> Result<()> {
    let mut manifest = RunManifest::new(&cli.out)?;
    let trace = load_trace(&args.trace, &mut manifest)?;
    let summary = summarize_records(&trace.records)?;
    let bins = bin_records(&trace.records, args.granularity)?;
    let mut md = String::new();
    let _ = writeln!(md, "# Cache traffic report\n");
    let name = args.trace.file_name().map_or_else(|| args.trace.display().to_string(), |n| n.to_string_lossy().into_owned());
    let _ = writeln!(md, "Trace: `{name}` ({} requests, {} bins)\n", trace.len(), args.granularity);
    let _ = writeln!(md, "| class | requests | file hit rate | byte hit rate | hit bytes | miss bytes |");
    let _ = writeln!(md, "|---|---:|---:|---:|---:|---:|");
    let mut classes: Vec<&str> = trace.records.iter().map(|r| r.file_class.as_str()).collect();
    classes.sort_unstable();
    classes.dedup();
    let mut rows = vec![("all".to_owned(), summary)];
    for class in classes {
        let records: Vec<_> = trace.records.iter().filter(|r| r.file_class == class).cloned().collect();
        if let Ok(s) = summarize_records(&records) {
            rows.push((class.to_owned(), s));
        }
    }
    for (class, s) in &rows {
        let _ = writeln!(
            md,
            "| {class} | {} | {:.4} | {:.4} | {} | {} |",
            s.total_accesses, s.file_hit_rate, s.byte_hit_rate, s.hit_bytes, s.miss_bytes
        );
    }

    let (x, [hit, miss, byte_hit, byte_miss]) = rate_rows(&bins);
    let rows = x.iter().enumerate().map(|(i, t)| {
        vec![t.to_string(), hit[i].to_string(), miss[i].to_string(), byte_hit[i].to_string(), byte_miss[i].to_string()]
    });
    let header = ["bin_start", "hit_fraction", "miss_fraction", "byte_hit_fraction", "byte_miss_fraction"];
    manifest.write("rates.csv", &csv_bytes(&header, rows)?)?;
    let rates = Chart {
        title: format!("Request outcome fractions ({})", args.granularity),
        y_label: "fraction of requests".into(),
        source_csv: "rates.csv".into(),
        x: x.clone(),
        series: vec![Series::new("hit_fraction", "hits", hit), Series::new("miss_fraction", "misses", miss)],
        stacked: true,
    };
    manifest.write("rates.svg", rates.render().as_bytes())?;

    let x: Vec<Timestamp> = bins.iter().map(|b| b.bin_start).collect();
    let rows = bins.iter().map(|b| {
        vec![
            b.bin_start.to_string(),
            b.hit_bytes.to_string(),
            b.miss_bytes.to_string(),
            b.hit_count.to_string(),
            b.miss_count.to_string(),
        ]
    });
    manifest.write("volume.csv", &csv_bytes(&["bin_start", "hit_bytes", "miss_bytes", "hit_count", "miss_count"], rows)?)?;
    let volume = Chart {
        title: format!("Transferred volume ({})", args.granularity),
        y_label: "bytes".into(),
        source_csv: "volume.csv".into(),
        x,
        series: vec![
            Series::new("hit_bytes", "served from cache", bins.iter().map(|b| b.hit_bytes as f64).collect()),
            Series::new("miss_bytes", "pulled from origin", bins.iter().map(|b| b.miss_bytes as f64).collect()),
        ],
        stacked: false,
    };
    manifest.write("volume.svg", volume.render().as_bytes())?;
    let _ = writeln!(md, "\n![rates](rates.svg)\n\n![volume](volume.svg)");

    if let Some(dir) = &args.forecast {
        let eval_path = dir.join(EVALUATION_FILE);
        let header = evaluation_csv_header();
        let records = csv_records(&eval_path, &header)?;
        let eval_bytes = read_input(&eval_path)?;
        manifest.input(&eval_path, &eval_bytes);
        let _ = writeln!(md, "\n## Forecasts\n");
        let _ = writeln!(md, "| target | smoothing | test RMSE | series std | relative RMSE |");
        let _ = writeln!(md, "|---|---:|---:|---:|---:|");
        let mut images = String::new();
        for record in &records {
            let target: ForecastTarget = parse_field(&eval_path, record, 0)?;
            let window: usize = parse_field(&eval_path, record, 2)?;
            let test_rmse: f64 = parse_field(&eval_path, record, 4)?;
            let series_std: f64 = parse_field(&eval_path, record, 5)?;
            let relative: f64 = parse_field(&eval_path, record, 6)?;
            let _ = writeln!(md, "| {target} | {window} | {test_rmse:.4e} | {series_std:.4e} | {relative:.3} |");

            let stem = prediction_file_stem(target, window);
            let csv_name = format!("predictions_{stem}.csv");
            let pred_path = dir.join(&csv_name);
            let preds = csv_records(&pred_path, &PREDICTIONS_HEADER)?;
            let pred_bytes = read_input(&pred_path)?;
            manifest.input(&pred_path, &pred_bytes);
            let mut x = Vec::with_capacity(preds.len());
            let (mut actual, mut predicted) = (Vec::with_capacity(preds.len()), Vec::with_capacity(preds.len()));
            for p in &preds {
                x.push(parse_field::<Timestamp>(&pred_path, p, 0)?);
                actual.push(parse_field::<f64>(&pred_path, p, 1)?);
                predicted.push(parse_field::<f64>(&pred_path, p, 2)?);
            }
            manifest.write(&csv_name, &pred_bytes)?;
            let chart = overlay_chart(&format!("{stem}: predicted vs actual (test split)"), &csv_name, x, actual, predicted);
            let svg_name = format!("overlay_{stem}.svg");
            manifest.write(&svg_name, chart.render().as_bytes())?;
            let _ = writeln!(images, "\n![{stem}]({svg_name})");
        }
        md.push_str(&images);
    }
    manifest.write("summary.md", md.as_bytes())?;
    manifest.finish()?;
    Ok(())
}
