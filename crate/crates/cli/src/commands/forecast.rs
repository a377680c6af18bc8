use anyhow::Result;
use cachecast::aggregate::read_bins_csv;
use cachecast::config;
use cachecast::forecast::{run_forecast, ForecastConfig, ForecastRun, ForecastTarget, TrainedModel};
use cachecast::trace::format_f64;
use rayon::prelude::*;

use super::{csv_bytes, read_input, read_text};
use crate::args::{Cli, ForecastArgs};
use crate::exit;
use crate::manifest::RunManifest;
use crate::svg::{Chart, Series};

pub const EVALUATION_FILE: &str = "evaluation.csv";
pub const PREDICTIONS_HEADER: [&str; 4] = ["bin_start", "actual", "predicted", "raw_actual"];

pub fn evaluation_csv_header() -> [&'static str; 14] {
    [
        "target",
        "granularity",
        "smoothing_window",
        "train_rmse",
        "test_rmse",
        "series_std",
        "relative_rmse",
        "test_std",
        "test_relative_rmse",
        "raw_test_rmse",
        "window_length",
        "epochs",
        "train_samples",
        "test_samples",
    ]
}

/// `miss_count` unsmoothed, `miss_count_ma24` for a 24-bin moving average.
pub fn prediction_file_stem(target: ForecastTarget, smoothing_window: usize) -> String {
    if smoothing_window <= 1 {
        target.as_str().to_owned()
    } else {
        format!("{}_ma{smoothing_window}", target.as_str())
    }
}

pub fn overlay_chart(
    title: &str,
    source_csv: &str,
    run_x: Vec<cachecast::time::Timestamp>,
    actual: Vec<f64>,
    predicted: Vec<f64>,
) -> Chart {
    Chart {
        title: title.to_owned(),
        y_label: "value".into(),
        source_csv: source_csv.to_owned(),
        x: run_x,
        series: vec![Series::new("actual", "actual", actual), Series::new("predicted", "predicted", predicted)],
        stacked: false,
    }
}

fn evaluation_row(run: &ForecastRun) -> Vec<String> {
    let e = &run.evaluation;
    vec![
        run.config.target.as_str().to_owned(),
        run.granularity.to_string(),
        run.smoothing_window.to_string(),
        format_f64(e.train_rmse),
        format_f64(e.test_rmse),
        format_f64(e.series_std),
        format_f64(e.relative_rmse),
        format_f64(e.test_std),
        format_f64(e.test_relative_rmse),
        format_f64(run.raw_test_rmse),
        run.window_length.to_string(),
        run.config.epochs.to_string(),
        run.train.len().to_string(),
        run.test.len().to_string(),
    ]
}

pub fn run(cli: &Cli, args: &ForecastArgs) -> Result<()> {
    let mut manifest = RunManifest::new(&cli.out)?;
    let mut base = match &cli.config {
        Some(path) => {
            let text = read_text(path)?;
            manifest.config(path, text.as_bytes());
            config::parse_forecast(&text, path)?
        }
        None => ForecastConfig::default(),
    };
    if let Some(seed) = cli.seed {
        base.rng_seed = seed;
    }
    if let Some(epochs) = args.epochs {
        base.epochs = epochs;
    }
    base.validate()?;
    manifest.seed("forecast", base.rng_seed);

    let bytes = read_input(&args.bins)?;
    manifest.input(&args.bins, &bytes);
    let bins = read_bins_csv(bytes.as_slice())?;

    let targets: Vec<ForecastTarget> = if args.targets.is_empty() { ForecastTarget::ALL.to_vec() } else { args.targets.clone() };
    let mut windows = vec![1];
    for &w in &args.smooth {
        if w == 0 {
            return Err(exit::usage("--smooth must be at least 1"));
        }
        if !windows.contains(&w) {
            windows.push(w);
        }
    }
    let jobs: Vec<(ForecastTarget, usize)> = targets.iter().flat_map(|&t| windows.iter().map(move |&w| (t, w))).collect();
    let runs = manifest.time("train", || {
        jobs.par_iter()
            .map(|&(target, window)| run_forecast(&bins, &base.clone().with_target(target), window))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut history = Vec::new();
    for run in &runs {
        let stem = prediction_file_stem(run.config.target, run.smoothing_window);
        manifest.write(&format!("model_{stem}.txt"), TrainedModel::from_run(run).to_text().as_bytes())?;
        let x: Vec<_> = run.test.target_bins.iter().map(|&i| bins[i].bin_start).collect();
        let rows = x.iter().enumerate().map(|(k, ts)| {
            vec![
                ts.to_string(),
                format_f64(run.test.raw_targets[k]),
                format_f64(run.test_predictions[k]),
                format_f64(run.raw_test_targets[k]),
            ]
        });
        let csv_name = format!("predictions_{stem}.csv");
        manifest.write(&csv_name, &csv_bytes(&PREDICTIONS_HEADER, rows)?)?;
        let title = format!("{stem}: predicted vs actual (test split)");
        let chart = overlay_chart(&title, &csv_name, x, run.test.raw_targets.clone(), run.test_predictions.clone());
        manifest.write(&format!("overlay_{stem}.svg"), chart.render().as_bytes())?;
        for (epoch, rmse) in run.history.epoch_rmse.iter().enumerate() {
            history.push(vec![
                run.config.target.as_str().to_owned(),
                run.smoothing_window.to_string(),
                (epoch + 1).to_string(),
                format_f64(*rmse),
            ]);
        }
        eprintln!("{stem}: test rmse {:.4e}, relative {:.3}", run.evaluation.test_rmse, run.evaluation.relative_rmse);
    }
    manifest.write("history.csv", &csv_bytes(&["target", "smoothing_window", "epoch", "train_rmse"], history)?)?;
    manifest.write(EVALUATION_FILE, &csv_bytes(&evaluation_csv_header(), runs.iter().map(evaluation_row))?)?;
    manifest.finish()?;
    Ok(())
}
