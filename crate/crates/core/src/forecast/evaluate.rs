use ndarray::s;
use serde::{Deserialize, Serialize};

use super::config::ForecastConfig;
use super::dataset::{build_dataset_with_target, feature_matrix, WindowedDataset};
use super::lstm::{cast, predict, LstmFloat, LstmParams};
use super::train::{train, TrainingHistory};
use super::ForecastError;
use crate::aggregate::{moving_average, rmse, BinFeatures, Granularity};

const PREDICT_BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub train_rmse: f64,
    pub test_rmse: f64,
    /// Standard deviation of the target over every sample of both splits.
    pub series_std: f64,
    pub test_std: f64,
    /// `test_rmse / series_std`.
    pub relative_rmse: f64,
    /// `test_rmse / test_std`.
    pub test_relative_rmse: f64,
}

fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Unscaled predictions for every sample of `dataset`.
pub fn predict_dataset<F: LstmFloat>(params: &LstmParams<F>, dataset: &WindowedDataset) -> Result<Vec<f64>, ForecastError> {
    let mut out = Vec::with_capacity(dataset.len());
    let mut start = 0;
    while start < dataset.len() {
        let end = (start + PREDICT_BATCH).min(dataset.len());
        let x = dataset.inputs.slice(s![start..end, .., ..]).mapv(cast::<f64, F>);
        let pred = predict(params, x.view())?;
        out.extend(pred.iter().map(|&p| dataset.unscale_target(cast(p))));
        start = end;
    }
    Ok(out)
}

/// Scores unscaled predictions against both splits' raw targets.
pub fn evaluate_predictions(
    train_pred: &[f64],
    train: &WindowedDataset,
    test_pred: &[f64],
    test: &WindowedDataset,
) -> Result<Evaluation, ForecastError> {
    if train.is_empty() || test.is_empty() {
        return Err(ForecastError::EmptySplit);
    }
    let train_rmse = rmse(train_pred, &train.raw_targets)?;
    let test_rmse = rmse(test_pred, &test.raw_targets)?;
    let all: Vec<f64> = train.raw_targets.iter().chain(&test.raw_targets).copied().collect();
    let series_std = population_std(&all);
    let test_std = population_std(&test.raw_targets);
    Ok(Evaluation {
        train_rmse,
        test_rmse,
        series_std,
        test_std,
        relative_rmse: ratio(test_rmse, series_std),
        test_relative_rmse: ratio(test_rmse, test_std),
    })
}

pub fn evaluate<F: LstmFloat>(
    params: &LstmParams<F>,
    train: &WindowedDataset,
    test: &WindowedDataset,
) -> Result<Evaluation, ForecastError> {
    if train.is_empty() || test.is_empty() {
        return Err(ForecastError::EmptySplit);
    }
    evaluate_predictions(&predict_dataset(params, train)?, train, &predict_dataset(params, test)?, test)
}

/// Everything produced by one train-and-evaluate run.
#[derive(Debug, Clone)]
pub struct ForecastRun {
    pub config: ForecastConfig,
    pub granularity: Granularity,
    pub window_length: usize,
    /// Moving-average window applied to the target; 1 means unsmoothed.
    pub smoothing_window: usize,
    pub params: LstmParams<f32>,
    pub history: TrainingHistory,
    pub train: WindowedDataset,
    pub test: WindowedDataset,
    pub evaluation: Evaluation,
    pub test_predictions: Vec<f64>,
    /// Unsmoothed target at each test sample's target bin.
    pub raw_test_targets: Vec<f64>,
    /// Test predictions scored against the unsmoothed target.
    pub raw_test_rmse: f64,
}

/// Trains on `bins` with the config's target smoothed by a trailing moving
/// average of `smoothing_window` bins (inputs stay unsmoothed) and evaluates
/// on the held-out tail.
///
/// The input window is widened to at least `smoothing_window` bins: the
/// smoothed target one step ahead is a function of that many raw bins, so a
/// shorter window would hide most of what it depends on.
pub fn run_forecast(
    bins: &[BinFeatures],
    config: &ForecastConfig,
    smoothing_window: usize,
) -> Result<ForecastRun, ForecastError> {
    config.validate()?;
    let granularity = bins.first().map_or(Granularity::Hourly, |b| b.granularity);
    let window_length = config.window_for(granularity).max(smoothing_window);
    let features = feature_matrix(bins);
    let raw_target: Vec<f64> = features.column(config.target.feature_index()).to_vec();
    if raw_target.is_empty() {
        return Err(ForecastError::SeriesTooShort { len: 0, required: window_length + 2 });
    }
    let target = moving_average(&raw_target, smoothing_window)?;
    let (train_set, test_set) = build_dataset_with_target(&features, &target, window_length, config.train_fraction)?;
    let (params, history) = train(&train_set, config)?;
    let train_pred = predict_dataset(&params, &train_set)?;
    let test_predictions = predict_dataset(&params, &test_set)?;
    let evaluation = evaluate_predictions(&train_pred, &train_set, &test_predictions, &test_set)?;
    let raw_test_targets: Vec<f64> = test_set.target_bins.iter().map(|&i| raw_target[i]).collect();
    let raw_test_rmse = rmse(&test_predictions, &raw_test_targets)?;
    Ok(ForecastRun {
        config: config.clone(),
        granularity,
        window_length,
        smoothing_window,
        params,
        history,
        train: train_set,
        test: test_set,
        evaluation,
        test_predictions,
        raw_test_targets,
        raw_test_rmse,
    })
}

/// The smoothed-target pipeline; see [`run_forecast`].
pub fn forecast_smoothed(bins: &[BinFeatures], config: &ForecastConfig, window: usize) -> Result<ForecastRun, ForecastError> {
    run_forecast(bins, config, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::build_dataset;
    use crate::time::Timestamp;

    fn ramp_bins(n: usize) -> Vec<BinFeatures> {
        (0..n)
            .map(|i| BinFeatures {
                miss_count: (i % 17) as u64 * 3 + 1,
                hit_count: (i % 5) as u64,
                ..BinFeatures::zero(Timestamp::from_millis(i as i64 * 3_600_000), Granularity::Hourly)
            })
            .collect()
    }

    #[test]
    fn perfect_predictions_score_zero() {
        let (train, test) = build_dataset(&ramp_bins(80), &ForecastConfig::default()).unwrap();
        let e = evaluate_predictions(&train.raw_targets, &train, &test.raw_targets, &test).unwrap();
        assert_eq!((e.test_rmse, e.relative_rmse), (0.0, 0.0));
    }

    #[test]
    fn mean_predictor_scores_one_against_test_spread() {
        let (train, test) = build_dataset(&ramp_bins(200), &ForecastConfig::default()).unwrap();
        let mean = test.raw_targets.iter().sum::<f64>() / test.len() as f64;
        let e = evaluate_predictions(&train.raw_targets, &train, &vec![mean; test.len()], &test).unwrap();
        assert!((e.test_relative_rmse - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_training_run_is_deterministic() {
        let config = ForecastConfig { hidden_units: 6, epochs: 3, window_length: Some(6), ..Default::default() };
        let a = run_forecast(&ramp_bins(60), &config, 1).unwrap();
        let b = run_forecast(&ramp_bins(60), &config, 1).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.history, b.history);
        assert_eq!(a.test_predictions, b.test_predictions);
    }

    #[test]
    fn long_smoothing_widens_the_input_window() {
        let config = ForecastConfig { hidden_units: 3, epochs: 1, window_length: Some(4), ..Default::default() };
        let run = run_forecast(&ramp_bins(60), &config, 9).unwrap();
        assert_eq!(run.window_length, 9);
        assert_eq!(run.train.inputs.shape()[1], 9);
        assert_eq!(run_forecast(&ramp_bins(60), &config, 3).unwrap().window_length, 4);
    }

    #[test]
    fn window_one_smoothing_is_the_plain_pipeline() {
        let config = ForecastConfig { hidden_units: 4, epochs: 2, window_length: Some(4), ..Default::default() };
        let bins = ramp_bins(40);
        let smoothed = forecast_smoothed(&bins, &config, 1).unwrap();
        let (train_set, test_set) = build_dataset(&bins, &config).unwrap();
        let (params, _) = train(&train_set, &config).unwrap();
        assert_eq!(smoothed.params, params);
        assert_eq!(smoothed.evaluation, evaluate(&params, &train_set, &test_set).unwrap());
        assert_eq!(smoothed.raw_test_rmse, smoothed.evaluation.test_rmse);
    }
}
