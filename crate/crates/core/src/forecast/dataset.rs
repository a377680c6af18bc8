use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use super::config::ForecastConfig;
use super::ForecastError;
use crate::aggregate::{BinFeatures, FEATURE_COUNT};

/// Per-column min-max scaling. Columns with zero range map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub ranges: Vec<f64>,
}

impl MinMaxScaler {
    /// Fits on the rows of `data` (rows x columns).
    pub fn fit(data: &Array2<f64>) -> Self {
        let (mins, ranges) = data
            .columns()
            .into_iter()
            .map(|col| {
                let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                (lo, hi - lo)
            })
            .unzip();
        MinMaxScaler { mins, ranges }
    }

    pub fn scale(&self, column: usize, value: f64) -> f64 {
        let range = self.ranges[column];
        if range > 0.0 {
            (value - self.mins[column]) / range
        } else {
            0.0
        }
    }

    /// Inverse of `scale`; zero-range columns return their constant.
    pub fn unscale(&self, column: usize, scaled: f64) -> f64 {
        scaled * self.ranges[column] + self.mins[column]
    }
}

/// Windowed one-step-ahead samples. Sample `i` reads bins
/// `[start + i, start + i + window)` and targets bin `start + i + window`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    /// Scaled inputs, samples x window x features.
    pub inputs: Array3<f64>,
    /// Scaled targets.
    pub targets: Vec<f64>,
    pub raw_targets: Vec<f64>,
    /// Bin index of each sample's target.
    pub target_bins: Vec<usize>,
    pub feature_scaler: MinMaxScaler,
    pub target_scaler: MinMaxScaler,
    pub window_length: usize,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn feature_mins(&self) -> &[f64] {
        &self.feature_scaler.mins
    }

    pub fn feature_ranges(&self) -> &[f64] {
        &self.feature_scaler.ranges
    }

    pub fn unscale_target(&self, scaled: f64) -> f64 {
        self.target_scaler.unscale(0, scaled)
    }
}

pub fn feature_matrix(bins: &[BinFeatures]) -> Array2<f64> {
    let mut m = Array2::zeros((bins.len(), FEATURE_COUNT));
    for (mut row, b) in m.rows_mut().into_iter().zip(bins) {
        row.iter_mut().zip(b.features()).for_each(|(dst, v)| *dst = v);
    }
    m
}

/// Number of training samples for `samples` windows: the floored fraction,
/// kept within [1, samples - 1] so both splits are non-empty.
pub fn train_count(samples: usize, train_fraction: f64) -> usize {
    ((samples as f64 * train_fraction).floor() as usize).clamp(1, samples - 1)
}

/// Builds chronological train/test datasets predicting the config's target
/// feature from all eight features.
pub fn build_dataset(bins: &[BinFeatures], config: &ForecastConfig) -> Result<(WindowedDataset, WindowedDataset), ForecastError> {
    let features = feature_matrix(bins);
    let target: Vec<f64> = features.column(config.target.feature_index()).to_vec();
    let window = bins.first().map_or(config.window_length.unwrap_or(1), |b| config.window_for(b.granularity));
    build_dataset_with_target(&features, &target, window, config.train_fraction)
}

/// As [`build_dataset`] with an explicit target series aligned to the rows
/// of `features`.
pub fn build_dataset_with_target(
    features: &Array2<f64>,
    target: &[f64],
    window: usize,
    train_fraction: f64,
) -> Result<(WindowedDataset, WindowedDataset), ForecastError> {
    let n = features.nrows();
    if target.len() != n {
        return Err(ForecastError::ShapeMismatch(format!("{} target values for {n} bins", target.len())));
    }
    if window == 0 || n < window + 2 {
        return Err(ForecastError::SeriesTooShort { len: n, required: window + 2 });
    }
    let samples = n - window;
    let n_train = train_count(samples, train_fraction);

    // training inputs cover bins [0, n_train - 1 + window)
    let feature_scaler = MinMaxScaler::fit(&features.slice(ndarray::s![..n_train - 1 + window, ..]).to_owned());
    let train_targets = Array2::from_shape_vec((n_train, 1), target[window..window + n_train].to_vec()).expect("shape");
    let target_scaler = MinMaxScaler::fit(&train_targets);

    let split = |first: usize, count: usize| {
        let mut inputs = Array3::zeros((count, window, FEATURE_COUNT));
        for s in 0..count {
            for t in 0..window {
                for f in 0..FEATURE_COUNT {
                    inputs[[s, t, f]] = feature_scaler.scale(f, features[[first + s + t, f]]);
                }
            }
        }
        let target_bins: Vec<usize> = (first..first + count).map(|s| s + window).collect();
        let raw_targets: Vec<f64> = target_bins.iter().map(|&i| target[i]).collect();
        WindowedDataset {
            inputs,
            targets: raw_targets.iter().map(|&v| target_scaler.scale(0, v)).collect(),
            raw_targets,
            target_bins,
            feature_scaler: feature_scaler.clone(),
            target_scaler: target_scaler.clone(),
            window_length: window,
        }
    };
    Ok((split(0, n_train), split(n_train, samples - n_train)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregate::Granularity;
    use crate::time::Timestamp;

    fn bins(values: &[u64]) -> Vec<BinFeatures> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| BinFeatures {
                miss_count: v,
                hit_count: 2 * v,
                ..BinFeatures::zero(Timestamp::from_millis(i as i64 * 3_600_000), Granularity::Hourly)
            })
            .collect()
    }

    #[test]
    fn twenty_six_bins_give_one_train_one_test() {
        let (train, test) = build_dataset(&bins(&[1; 26]), &ForecastConfig::default()).unwrap();
        assert_eq!((train.len(), test.len()), (1, 1));
        assert_eq!(train.target_bins, vec![24]);
        assert_eq!(test.target_bins, vec![25]);
    }

    #[test]
    fn too_short_is_rejected() {
        let err = build_dataset(&bins(&[1; 25]), &ForecastConfig::default()).unwrap_err();
        assert!(matches!(err, ForecastError::SeriesTooShort { len: 25, required: 26 }));
    }

    #[test]
    fn constant_series_scales_to_zero() {
        let (train, test) = build_dataset(&bins(&[7; 40]), &ForecastConfig::default()).unwrap();
        assert!(train.inputs.iter().chain(test.inputs.iter()).all(|&v| v == 0.0));
        assert!(train.targets.iter().all(|&v| v == 0.0));
        assert_eq!(train.unscale_target(0.0), 7.0);
    }

    #[test]
    fn windows_align_with_targets() {
        let values: Vec<u64> = (0..60).collect();
        let config = ForecastConfig { window_length: Some(5), ..Default::default() };
        let (train, test) = build_dataset(&bins(&values), &config).unwrap();
        assert_eq!(train.len() + test.len(), 55);
        assert_eq!(train.len(), 44);
        for d in [&train, &test] {
            for (s, &tb) in d.target_bins.iter().enumerate() {
                assert_eq!(d.raw_targets[s], tb as f64);
                let last = d.feature_scaler.unscale(0, d.inputs[[s, 4, 0]]);
                assert!((last - (tb - 1) as f64).abs() < 1e-9);
            }
        }
        assert!(train.target_bins.last() < test.target_bins.first());
    }
}
