use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ForecastError;
use crate::aggregate::Granularity;

/// The six series a model can be trained to predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastTarget {
    MissCount,
    MissBytes,
    AvgMissThroughput,
    HitCount,
    HitBytes,
    AvgHitThroughput,
}

impl ForecastTarget {
    pub const ALL: [ForecastTarget; 6] = [
        ForecastTarget::MissCount,
        ForecastTarget::MissBytes,
        ForecastTarget::AvgMissThroughput,
        ForecastTarget::HitCount,
        ForecastTarget::HitBytes,
        ForecastTarget::AvgHitThroughput,
    ];

    /// Column of this target in `BinFeatures::features()`.
    pub fn feature_index(self) -> usize {
        match self {
            ForecastTarget::MissCount => 0,
            ForecastTarget::MissBytes => 1,
            ForecastTarget::HitCount => 2,
            ForecastTarget::HitBytes => 3,
            ForecastTarget::AvgMissThroughput => 6,
            ForecastTarget::AvgHitThroughput => 7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ForecastTarget::MissCount => "miss_count",
            ForecastTarget::MissBytes => "miss_bytes",
            ForecastTarget::AvgMissThroughput => "avg_miss_throughput",
            ForecastTarget::HitCount => "hit_count",
            ForecastTarget::HitBytes => "hit_bytes",
            ForecastTarget::AvgHitThroughput => "avg_hit_throughput",
        }
    }
}

impl fmt::Display for ForecastTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ForecastTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ForecastTarget::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| format!("unknown target {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellActivation {
    #[default]
    Tanh,
}

/// Gate bias initialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateBiasInit {
    /// Forget-gate bias 1, all other biases 0.
    #[default]
    Unit,
    /// Forget-gate biases drawn as ln U(1, T - 1) for window length T, input-gate
    /// biases their negation. Gives some units memory spanning the whole window.
    Chrono,
}

pub const DEFAULT_HOURLY_WINDOW: usize = 24;
pub const DEFAULT_DAILY_WINDOW: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub hidden_units: usize,
    pub cell_activation: CellActivation,
    pub dropout_rate: f64,
    pub gate_bias_init: GateBiasInit,
    pub epochs: usize,
    /// Input window in bins; `None` picks 24 for hourly and 7 for daily bins.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_length: Option<usize>,
    pub train_fraction: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub rng_seed: u64,
    pub target: ForecastTarget,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            hidden_units: 128,
            cell_activation: CellActivation::Tanh,
            dropout_rate: 0.04,
            gate_bias_init: GateBiasInit::Unit,
            epochs: 50,
            window_length: None,
            train_fraction: 0.8,
            learning_rate: 1e-3,
            batch_size: 32,
            rng_seed: 0,
            target: ForecastTarget::MissCount,
        }
    }
}

impl ForecastConfig {
    pub fn with_target(mut self, target: ForecastTarget) -> Self {
        self.target = target;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn window_for(&self, granularity: Granularity) -> usize {
        self.window_length.unwrap_or(match granularity {
            Granularity::Hourly => DEFAULT_HOURLY_WINDOW,
            Granularity::Daily => DEFAULT_DAILY_WINDOW,
        })
    }

    pub fn validate(&self) -> Result<(), ForecastError> {
        let invalid =
            |field: &str, reason: &str| Err(ForecastError::InvalidConfig { field: field.to_owned(), reason: reason.to_owned() });
        if self.hidden_units == 0 {
            return invalid("hidden_units", "must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return invalid("dropout_rate", "must lie in [0, 1)");
        }
        if self.epochs == 0 {
            return invalid("epochs", "must be positive");
        }
        if self.window_length == Some(0) {
            return invalid("window_length", "must be positive");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return invalid("train_fraction", "must lie in (0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return invalid("learning_rate", "must be positive");
        }
        if self.batch_size == 0 {
            return invalid("batch_size", "must be positive");
        }
        Ok(())
    }
}
