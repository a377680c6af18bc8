//! Recurrent one-step-ahead forecasting of bin telemetry: windowed datasets
//! with train-only min-max scaling, an LSTM trained by backpropagation
//! through time, chronological evaluation and smoothed-target variants.

pub mod benchmark;
mod config;
mod dataset;
mod evaluate;
mod lstm;
mod model_io;
mod train;

use thiserror::Error;

use crate::aggregate::AggregateError;

pub use config::{CellActivation, ForecastConfig, ForecastTarget, GateBiasInit, DEFAULT_DAILY_WINDOW, DEFAULT_HOURLY_WINDOW};
pub use dataset::{build_dataset, build_dataset_with_target, feature_matrix, train_count, MinMaxScaler, WindowedDataset};
pub use evaluate::{evaluate, evaluate_predictions, forecast_smoothed, predict_dataset, run_forecast, Evaluation, ForecastRun};
pub use lstm::{backward, dropout_mask, forward, predict, ForwardCache, Gate, LstmFloat, LstmGrads, LstmParams};
pub use model_io::{TrainedModel, MODEL_MAGIC, MODEL_VERSION};
pub use train::{train, train_as, Adam, TrainingHistory};

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("series has {len} bins, at least {required} needed")]
    SeriesTooShort { len: usize, required: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite activation")]
    NonFiniteActivation,
    #[error("forward cache does not match the current parameters")]
    StaleCache,
    #[error("training diverged in epoch {epoch} (0-based)")]
    DivergenceDetected { epoch: usize },
    #[error("train or test split is empty")]
    EmptySplit,
    #[error("invalid forecast config: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("model line {line}: {reason}")]
    ModelFormat { line: usize, reason: String },
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
}
