//! Coordinate-descent fit of a workload to target hit rates.
//!
//! Knobs: each class's Zipf exponent (additive steps), each class's
//! population (multiplicative steps) and each campaign's fresh fraction
//! (additive, clamped to [0, 1]). The objective is the squared error of the
//! simulated (file, byte) hit rates against the targets.

use serde::{Deserialize, Serialize};

use super::generate::generate;
use super::spec::WorkloadSpec;
use super::WorkloadError;
use crate::aggregate::{summarize_records, SummaryStats};
use crate::simulate::{simulate, FederationSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Both rates within this distance of their targets stops the search.
    pub tolerance: f64,
    /// Requests before `horizon.start + warmup_millis` are excluded from the rates.
    pub warmup_millis: i64,
    pub min_step: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions { tolerance: 0.005, warmup_millis: 0, min_step: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationStatus {
    /// Targets met within tolerance.
    Converged,
    /// Step sizes shrank below the minimum without meeting the targets.
    Stalled,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationOutcome {
    pub spec: WorkloadSpec,
    pub achieved: SummaryStats,
    pub evaluations: usize,
    pub status: CalibrationStatus,
}

#[derive(Debug, Clone, Copy)]
enum Knob {
    Zipf(usize),
    Population(usize),
    Fresh(usize),
}

impl Knob {
    fn initial_step(self) -> f64 {
        match self {
            Knob::Zipf(_) => 0.2,
            Knob::Population(_) => 0.7,
            Knob::Fresh(_) => 0.15,
        }
    }

    fn apply(self, spec: &WorkloadSpec, delta: f64) -> Option<WorkloadSpec> {
        let mut out = spec.clone();
        match self {
            Knob::Zipf(i) => {
                let c = &mut out.classes[i];
                c.zipf_exponent = (c.zipf_exponent + delta).max(0.0);
            }
            Knob::Population(i) => {
                let c = &mut out.classes[i];
                c.population = ((c.population as f64 * delta.exp()).round() as u64).max(1);
            }
            Knob::Fresh(i) => {
                let c = &mut out.campaigns[i];
                c.fresh_fraction = (c.fresh_fraction + delta).clamp(0.0, 1.0);
            }
        }
        (out != *spec).then_some(out)
    }
}

/// Hit rates of `spec` simulated on `federation`, excluding the warm-up span.
pub fn evaluate_workload(
    spec: &WorkloadSpec,
    federation: &FederationSpec,
    warmup_millis: i64,
) -> Result<SummaryStats, WorkloadError> {
    let trace = generate(spec)?;
    let report = simulate(&trace, federation)?;
    let cutoff = spec.horizon.start.add_millis(warmup_millis);
    let first = report.resolved.records.partition_point(|r| r.ts < cutoff);
    Ok(summarize_records(&report.resolved.records[first..])?)
}

fn loss(targets: &SummaryStats, got: &SummaryStats) -> f64 {
    (got.file_hit_rate - targets.file_hit_rate).powi(2) + (got.byte_hit_rate - targets.byte_hit_rate).powi(2)
}

fn within(targets: &SummaryStats, got: &SummaryStats, tol: f64) -> bool {
    (got.file_hit_rate - targets.file_hit_rate).abs() <= tol && (got.byte_hit_rate - targets.byte_hit_rate).abs() <= tol
}

pub fn calibrate(
    targets: &SummaryStats,
    base: &WorkloadSpec,
    federation: &FederationSpec,
    budget: usize,
) -> Result<CalibrationOutcome, WorkloadError> {
    calibrate_with(targets, base, federation, budget, CalibrationOptions::default())
}

/// Searches from `base` for the spec whose simulated rates best match
/// `targets`, spending at most `budget` simulations. Running out of budget
/// is reported in the status, not as an error.
pub fn calibrate_with(
    targets: &SummaryStats,
    base: &WorkloadSpec,
    federation: &FederationSpec,
    budget: usize,
    options: CalibrationOptions,
) -> Result<CalibrationOutcome, WorkloadError> {
    if budget == 0 {
        return Err(WorkloadError::InvalidSpec { field: "budget".into(), reason: "must be at least 1".into() });
    }
    base.validate()?;
    let mut best = base.clone();
    let mut achieved = evaluate_workload(&best, federation, options.warmup_millis)?;
    let mut best_loss = loss(targets, &achieved);
    let mut evaluations = 1;

    let knobs: Vec<Knob> = (0..base.classes.len())
        .flat_map(|i| [Knob::Zipf(i), Knob::Population(i)])
        .chain((0..base.campaigns.len()).map(Knob::Fresh))
        .collect();
    let mut steps: Vec<f64> = knobs.iter().map(|k| k.initial_step()).collect();

    let status = 'search: loop {
        if within(targets, &achieved, options.tolerance) {
            break CalibrationStatus::Converged;
        }
        if steps.iter().all(|&s| s < options.min_step) {
            break CalibrationStatus::Stalled;
        }
        let mut improved = false;
        for (k, knob) in knobs.iter().enumerate() {
            for sign in [1.0, -1.0] {
                let Some(candidate) = knob.apply(&best, sign * steps[k]) else { continue };
                if evaluations >= budget {
                    break 'search CalibrationStatus::BudgetExhausted;
                }
                let got = evaluate_workload(&candidate, federation, options.warmup_millis)?;
                evaluations += 1;
                let l = loss(targets, &got);
                if l < best_loss {
                    best = candidate;
                    achieved = got;
                    best_loss = l;
                    improved = true;
                    break;
                }
            }
            if within(targets, &achieved, options.tolerance) {
                break;
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    };
    Ok(CalibrationOutcome { spec: best, achieved, evaluations, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::NodeSpec;
    use crate::time::{Timestamp, MILLIS_PER_HOUR};
    use crate::workload::{FileClassSpec, Horizon};

    fn single_file_spec() -> WorkloadSpec {
        let start = Timestamp::from_ymd_hms(2022, 1, 1, 0, 0, 0).unwrap();
        let class = |label: &str| FileClassSpec {
            class_label: label.into(),
            population: 1,
            size_lognorm_mu: 8.0,
            size_lognorm_sigma: 0.0,
            zipf_exponent: 1.0,
            request_rate_per_hour: 20.0,
        };
        WorkloadSpec {
            classes: vec![class("S"), class("L")],
            campaigns: vec![],
            horizon: Horizon { start, end: start.add_millis(24 * MILLIS_PER_HOUR) },
            rng_seed: 1,
        }
    }

    #[test]
    fn single_file_classes_hit_everything_after_warmup() {
        let fed = FederationSpec::unified(vec![NodeSpec::new("n", 1 << 30)]);
        let targets = SummaryStats::from_totals(1, 0, 1, 0).unwrap();
        let options = CalibrationOptions { warmup_millis: 2 * MILLIS_PER_HOUR, ..Default::default() };
        let out = calibrate_with(&targets, &single_file_spec(), &fed, 5, options).unwrap();
        assert_eq!(out.status, CalibrationStatus::Converged);
        assert_eq!((out.achieved.file_hit_rate, out.achieved.byte_hit_rate), (1.0, 1.0));
        assert_eq!(out.evaluations, 1);
    }

    #[test]
    fn achieved_targets_return_base_unchanged() {
        let fed = FederationSpec::unified(vec![NodeSpec::new("n", 1 << 30)]);
        let base = single_file_spec();
        let targets = evaluate_workload(&base, &fed, 0).unwrap();
        let out = calibrate(&targets, &base, &fed, 10).unwrap();
        assert_eq!(out.spec, base);
        assert_eq!(out.evaluations, 1);
    }

    #[test]
    fn budget_exhaustion_keeps_best() {
        let fed = FederationSpec::unified(vec![NodeSpec::new("n", 1 << 30)]);
        let mut base = single_file_spec();
        base.classes[0].population = 50;
        let targets = SummaryStats::from_totals(0, 1, 0, 1).unwrap();
        let out = calibrate(&targets, &base, &fed, 3).unwrap();
        assert_eq!(out.status, CalibrationStatus::BudgetExhausted);
        assert_eq!(out.evaluations, 3);
        let base_rates = evaluate_workload(&base, &fed, 0).unwrap();
        assert!(out.achieved.file_hit_rate <= base_rates.file_hit_rate);
    }

    #[test]
    fn zero_budget_is_rejected() {
        let fed = FederationSpec::unified(vec![NodeSpec::new("n", 1 << 30)]);
        let targets = SummaryStats::from_totals(1, 1, 1, 1).unwrap();
        assert!(calibrate(&targets, &single_file_spec(), &fed, 0).is_err());
    }
}
