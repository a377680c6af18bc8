//! Seeded synthetic request streams with a hot small-file class, a cold
//! large-file class and campaign episodes of heavy large-file traffic.

mod calibrate;
mod generate;
mod socal;
mod spec;

use thiserror::Error;

use crate::aggregate::AggregateError;
use crate::simulate::SimulateError;

pub use calibrate::{calibrate, calibrate_with, evaluate_workload, CalibrationOptions, CalibrationOutcome, CalibrationStatus};
pub use generate::{default_horizon_start, file_size, fresh_file_id, generate, popular_file_id, zipf_pmf};
pub use socal::{campaign_window, default_socal_workload, LARGE_MEAN_BYTES, SMALL_MEAN_BYTES};
pub use spec::{CampaignSpec, FileClassSpec, Horizon, WorkloadSpec};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("invalid workload spec: {field}: {reason}")]
    InvalidSpec { field: String, reason: String },
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
}
