use ndarray::{Array1, Axis, NdFloat};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ForecastConfig, GateBiasInit};
use super::dataset::WindowedDataset;
use super::lstm::{backward, cast, dropout_mask, forward, LstmFloat, LstmGrads, LstmParams};
use super::ForecastError;
use crate::aggregate::FEATURE_COUNT;

const INIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;
const DROPOUT_STREAM: u64 = 3;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Adaptive-moment optimizer state.
#[derive(Debug, Clone)]
pub struct Adam<F> {
    pub learning_rate: F,
    pub beta1: F,
    pub beta2: F,
    pub epsilon: F,
    step: i32,
    m: Vec<Vec<F>>,
    v: Vec<Vec<F>>,
}

impl<F: NdFloat> Adam<F> {
    pub fn new(params: &LstmParams<F>, learning_rate: f64) -> Self {
        let zeros = || params.tensors().iter().map(|t| vec![F::zero(); t.len()]).collect();
        Adam {
            learning_rate: cast(learning_rate),
            beta1: cast(0.9),
            beta2: cast(0.999),
            epsilon: cast(1e-8),
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn update(&mut self, params: &mut LstmParams<F>, grads: &LstmGrads<F>) {
        self.step += 1;
        let one = F::one();
        let c1 = one - self.beta1.powi(self.step);
        let c2 = one - self.beta2.powi(self.step);
        let lr = self.learning_rate;
        for (k, (p, g)) in params.tensors_mut().into_iter().zip(grads.tensors()).enumerate() {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (one - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (one - self.beta2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + self.epsilon);
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    /// Per-epoch RMSE over the training mini-batches, in target units.
    pub epoch_rmse: Vec<f64>,
}

/// Mini-batch Adam on mean squared error. Initialization, shuffling and
/// dropout each draw from their own stream of the config seed.
pub fn train(dataset: &WindowedDataset, config: &ForecastConfig) -> Result<(LstmParams<f32>, TrainingHistory), ForecastError> {
    train_as::<f32>(dataset, config)
}

/// [`train`] in a chosen float type.
pub fn train_as<F: LstmFloat>(
    dataset: &WindowedDataset,
    config: &ForecastConfig,
) -> Result<(LstmParams<F>, TrainingHistory), ForecastError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(ForecastError::EmptySplit);
    }
    let hidden = config.hidden_units;
    let mut init_rng = stream_rng(config.rng_seed, INIT_STREAM);
    let mut params = LstmParams::<F>::init(FEATURE_COUNT, hidden, &mut init_rng);
    if config.gate_bias_init == GateBiasInit::Chrono {
        params.chrono_gate_bias(dataset.window_length, &mut init_rng);
    }
    let mut shuffle_rng = stream_rng(config.rng_seed, SHUFFLE_STREAM);
    let mut dropout_rng = stream_rng(config.rng_seed, DROPOUT_STREAM);
    let mut adam = Adam::new(&params, config.learning_rate);

    let inputs = dataset.inputs.mapv(cast::<f64, F>);
    let targets: Array1<F> = dataset.targets.iter().map(|&v| cast(v)).collect();
    let target_range = dataset.target_scaler.ranges[0];
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = TrainingHistory::default();
    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sse = 0.0f64;
        for chunk in order.chunks(config.batch_size) {
            let x = inputs.select(Axis(0), chunk);
            let mask = (config.dropout_rate > 0.0)
                .then(|| dropout_mask::<F, _>(&mut dropout_rng, chunk.len(), hidden, config.dropout_rate));
            let (pred, cache) = match forward(&params, x.view(), mask.as_ref()) {
                Err(ForecastError::NonFiniteActivation) => return Err(ForecastError::DivergenceDetected { epoch }),
                other => other?,
            };
            let t = targets.select(Axis(0), chunk);
            let mut dy = pred - t;
            sse += dy.iter().map(|&e| cast::<F, f64>(e * e)).sum::<f64>();
            let scale: F = cast(2.0 / chunk.len() as f64);
            dy.mapv_inplace(|e| e * scale);
            let grads = backward(&params, &cache, dy.view())?;
            adam.update(&mut params, &grads);
        }
        let rmse = (sse / n as f64).sqrt() * target_range;
        if !rmse.is_finite() {
            return Err(ForecastError::DivergenceDetected { epoch });
        }
        history.epoch_rmse.push(rmse);
    }
    Ok((params, history))
}
