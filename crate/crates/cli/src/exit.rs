//! Exit-code contract: 0 success, 2 config or usage error, 3 data validation
//! error, 4 training divergence. Anything unclassified exits 1.

use std::fmt;
use std::path::Path;

use cachecast::aggregate::AggregateError;
use cachecast::config::ConfigError;
use cachecast::forecast::ForecastError;
use cachecast::simulate::SimulateError;
use cachecast::trace::TraceError;
use cachecast::workload::WorkloadError;

pub const USAGE: u8 = 2;
pub const DATA: u8 = 3;
pub const DIVERGENCE: u8 = 4;

/// An error with an explicit exit code, for failures the core types do not cover.
#[derive(Debug)]
pub struct Classified {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Classified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Classified {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    Classified { code: USAGE, message: message.into() }.into()
}

/// Missing or unreadable inputs are usage errors that name the path.
pub fn unreadable(path: &Path, err: std::io::Error) -> anyhow::Error {
    usage(format!("cannot read {}: {err}", path.display()))
}

fn simulate_code(e: &SimulateError) -> u8 {
    match e {
        SimulateError::InvalidFederation(_) | SimulateError::UnmappedClass { .. } => USAGE,
        SimulateError::Aggregate(a) => aggregate_code(a),
        _ => DATA,
    }
}

fn aggregate_code(e: &AggregateError) -> u8 {
    match e {
        AggregateError::ZeroWindow => USAGE,
        _ => DATA,
    }
}

fn forecast_code(e: &ForecastError) -> u8 {
    match e {
        ForecastError::DivergenceDetected { .. } | ForecastError::NonFiniteActivation => DIVERGENCE,
        ForecastError::InvalidConfig { .. } | ForecastError::ModelFormat { .. } => USAGE,
        ForecastError::Aggregate(a) => aggregate_code(a),
        _ => DATA,
    }
}

/// Walks the error chain for the first cause with a known exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(c) = cause.downcast_ref::<Classified>() {
            return c.code;
        }
        if cause.is::<ConfigError>() {
            return USAGE;
        }
        if cause.is::<TraceError>() {
            return DATA;
        }
        if let Some(e) = cause.downcast_ref::<SimulateError>() {
            return simulate_code(e);
        }
        if let Some(e) = cause.downcast_ref::<AggregateError>() {
            return aggregate_code(e);
        }
        if let Some(e) = cause.downcast_ref::<ForecastError>() {
            return forecast_code(e);
        }
        if let Some(e) = cause.downcast_ref::<WorkloadError>() {
            return match e {
                WorkloadError::InvalidSpec { .. } => USAGE,
                WorkloadError::Simulate(s) => simulate_code(s),
                WorkloadError::Aggregate(a) => aggregate_code(a),
            };
        }
    }
    1
}
