use cachecast::aggregate::{moving_average, std_dev, BinFeatures};
use cachecast::forecast::benchmark::{sine_bins, spiky_bins, SPIKY_BENCHMARK_BINS};
use cachecast::forecast::{
    backward, build_dataset, build_dataset_with_target, dropout_mask, feature_matrix, forward, predict_dataset, run_forecast,
    train, ForecastConfig, ForecastTarget, LstmParams, MinMaxScaler,
};
use ndarray::{concatenate, s, Array1, Array3, Axis};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sse(p: &LstmParams<f64>, x: &Array3<f64>, t: &Array1<f64>, mask: &ndarray::Array2<f64>) -> f64 {
    let (y, _) = forward(p, x.view(), Some(mask)).unwrap();
    (&y - t).mapv(|e| e * e).sum()
}

fn random_model(seed: u64, hidden: usize) -> (LstmParams<f64>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = LstmParams::<f64>::init(8, hidden, &mut rng);
    for i in 0..p.num_params() {
        let v = p.get(i) + rng.random_range(-0.5..0.5);
        p.set(i, v);
    }
    (p, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn backprop_matches_central_differences(seed in any::<u64>(), batch in 1usize..4, rate in 0.0f64..0.5) {
        let (p, mut rng) = random_model(seed, 4);
        let x = Array3::from_shape_simple_fn((batch, 5, 8), || rng.random_range(-1.0..1.0));
        let t = Array1::from_shape_simple_fn(batch, || rng.random_range(-1.0..1.0));
        let mask = dropout_mask::<f64, _>(&mut rng, batch, 4, rate);
        let (y, cache) = forward(&p, x.view(), Some(&mask)).unwrap();
        let g = backward(&p, &cache, (2.0 * (&y - &t)).view()).unwrap();
        let eps = 1e-5;
        for i in 0..p.num_params() {
            let mut q = p.clone();
            q.set(i, p.get(i) + eps);
            let up = sse(&q, &x, &t, &mask);
            q.set(i, p.get(i) - eps);
            let down = sse(&q, &x, &t, &mask);
            let numeric = (up - down) / (2.0 * eps);
            let analytic = g.get(i);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            prop_assert!(rel < 1e-4, "param {}: {} vs {}", i, analytic, numeric);
        }
    }

    #[test]
    fn duplicated_sample_doubles_the_gradient(seed in any::<u64>()) {
        let (p, mut rng) = random_model(seed, 4);
        let x = Array3::from_shape_simple_fn((1, 5, 8), || rng.random_range(-1.0..1.0));
        let dl = Array1::from_elem(1, rng.random_range(-1.0..1.0));
        let (_, c1) = forward(&p, x.view(), None).unwrap();
        let single = backward(&p, &c1, dl.view()).unwrap().flatten();
        let x2 = concatenate(Axis(0), &[x.view(), x.view()]).unwrap();
        let dl2 = concatenate(Axis(0), &[dl.view(), dl.view()]).unwrap();
        let (_, c2) = forward(&p, x2.view(), None).unwrap();
        let double = backward(&p, &c2, dl2.view()).unwrap().flatten();
        for (d, s) in double.iter().zip(&single) {
            prop_assert!((d - 2.0 * s).abs() <= 1e-12 * s.abs().max(1.0));
        }
    }

    #[test]
    fn affine_feature_maps_leave_scaled_inputs_unchanged(column in 0usize..8, slope in 0.01f64..100.0, offset in -1e6f64..1e6) {
        let bins = spiky_bins(3, 120);
        let features = feature_matrix(&bins);
        let target: Vec<f64> = features.column(6).to_vec();
        let mut mapped = features.clone();
        mapped.column_mut(column).mapv_inplace(|v| slope * v + offset);
        let (a_train, a_test) = build_dataset_with_target(&features, &target, 24, 0.8).unwrap();
        let (b_train, b_test) = build_dataset_with_target(&mapped, &target, 24, 0.8).unwrap();
        for (a, b) in [(&a_train, &b_train), (&a_test, &b_test)] {
            for (u, v) in a.inputs.iter().zip(b.inputs.iter()) {
                prop_assert!((u - v).abs() <= 1e-6, "{} vs {}", u, v);
            }
        }
    }

    #[test]
    fn scaling_inverts(values in prop::collection::vec(-1e9f64..1e9, 2..50)) {
        let data = ndarray::Array2::from_shape_vec((values.len(), 1), values.clone()).unwrap();
        let scaler = MinMaxScaler::fit(&data);
        for &v in &values {
            let back = scaler.unscale(0, scaler.scale(0, v));
            prop_assert!((back - v).abs() <= 1e-9 * v.abs().max(scaler.ranges[0]), "{} vs {}", back, v);
        }
    }
}

#[test]
fn scaler_sees_only_the_training_split() {
    let mut bins = sine_bins(200, 24.0);
    for b in bins.iter_mut().skip(180) {
        b.miss_count *= 10;
        b.avg_miss_throughput *= 10.0;
    }
    let config = ForecastConfig::default();
    let (train, test) = build_dataset(&bins, &config).unwrap();
    let features = feature_matrix(&bins);
    let last_train_input = train.target_bins.last().unwrap() - 1;
    let train_only = MinMaxScaler::fit(&features.slice(s![..=last_train_input, ..]).to_owned());
    assert_eq!(train.feature_scaler, train_only);
    assert_eq!(test.feature_scaler, train_only);
    assert_ne!(train.feature_scaler, MinMaxScaler::fit(&features));
    assert!(train.inputs.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(test.inputs.iter().any(|&v| v > 1.0));
    assert!(train.target_bins.iter().max() < test.target_bins.iter().min());
}

#[test]
fn shifting_the_series_shifts_predictions() {
    let base = spiky_bins(8, 300);
    let k = 7;
    let mut shifted: Vec<BinFeatures> = (0..k).map(|_| base[150].clone()).collect();
    shifted.extend(base.iter().cloned());
    for (i, b) in shifted.iter_mut().enumerate() {
        b.bin_start = base[0].bin_start.add_millis((i as i64 - k as i64) * 3_600_000);
    }
    // pin every feature's extremes inside both training splits
    let features = feature_matrix(&base);
    let mut lo = base[0].clone();
    let mut hi = base[0].clone();
    lo.miss_count = 0;
    lo.miss_bytes = 0;
    lo.hit_count = 0;
    lo.hit_bytes = 0;
    (lo.agg_miss_throughput, lo.agg_hit_throughput, lo.avg_miss_throughput, lo.avg_hit_throughput) = (0.0, 0.0, 0.0, 0.0);
    let max = |c: usize| features.column(c).fold(0.0f64, |a, &v| a.max(v));
    hi.miss_count = max(0) as u64;
    hi.miss_bytes = max(1) as u64;
    hi.hit_count = max(2) as u64;
    hi.hit_bytes = max(3) as u64;
    (hi.agg_miss_throughput, hi.agg_hit_throughput, hi.avg_miss_throughput, hi.avg_hit_throughput) =
        (max(4), max(5), max(6), max(7));
    let pin = |series: &mut Vec<BinFeatures>, at: usize| {
        for (j, template) in [&lo, &hi].into_iter().enumerate() {
            for idx in [at + j, at + 24 + j] {
                let start = series[idx].bin_start;
                series[idx] = BinFeatures { bin_start: start, ..template.clone() };
            }
        }
    };
    let mut original = base.clone();
    pin(&mut original, 0);
    pin(&mut shifted, k);

    let config =
        ForecastConfig { train_fraction: 0.5, ..ForecastConfig::default() }.with_target(ForecastTarget::AvgMissThroughput);
    let (a_train, a_test) = build_dataset(&original, &config).unwrap();
    let (b_train, b_test) = build_dataset(&shifted, &config).unwrap();
    assert_eq!(a_train.feature_scaler, b_train.feature_scaler);
    assert_eq!(a_train.target_scaler, b_train.target_scaler);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = LstmParams::<f32>::init(8, 8, &mut rng);
    let preds = |train: &_, test: &_| -> Vec<f64> {
        let mut p = predict_dataset(&params, train).unwrap();
        p.extend(predict_dataset(&params, test).unwrap());
        p
    };
    let a = preds(&a_train, &a_test);
    let b = preds(&b_train, &b_test);
    assert_eq!(b.len(), a.len() + k);
    assert_eq!(&b[k..], &a[..]);
}

#[test]
fn constant_target_is_fit_exactly() {
    let bins = sine_bins(200, 24.0);
    let features = feature_matrix(&bins);
    let target = vec![42.0; bins.len()];
    let (train_set, _) = build_dataset_with_target(&features, &target, 24, 0.8).unwrap();
    let config = ForecastConfig { hidden_units: 16, epochs: 50, ..ForecastConfig::default() };
    let (_, history) = train(&train_set, &config).unwrap();
    assert_eq!(history.epoch_rmse.len(), 50);
    assert!(history.epoch_rmse.last().unwrap().abs() < 1e-9);
}

#[test]
fn sine_benchmark_is_learned() {
    let bins = sine_bins(2000, 24.0);
    let config = ForecastConfig { hidden_units: 32, epochs: 20, ..ForecastConfig::default() };
    let run = run_forecast(&bins, &config, 1).unwrap();
    assert!(run.evaluation.relative_rmse < 0.2, "{:?}", run.evaluation);
}

#[test]
fn smoothing_reduces_spread_on_the_spiky_benchmark() {
    let bins = spiky_bins(2022, SPIKY_BENCHMARK_BINS);
    let raw: Vec<f64> = bins.iter().map(|b| b.avg_miss_throughput).collect();
    let sigma = std_dev(&raw).unwrap();
    for w in [24, 168] {
        assert!(std_dev(&moving_average(&raw, w).unwrap()).unwrap() <= sigma);
    }
}
