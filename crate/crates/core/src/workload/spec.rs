use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::WorkloadError;
use crate::time::Timestamp;

/// One population of files sharing size and popularity parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileClassSpec {
    pub class_label: String,
    /// Number of distinct files in the class.
    pub population: u64,
    /// Mean of ln(size in bytes).
    pub size_lognorm_mu: f64,
    pub size_lognorm_sigma: f64,
    /// Zipf skew over popularity ranks; 0 is uniform.
    pub zipf_exponent: f64,
    pub request_rate_per_hour: f64,
}

impl FileClassSpec {
    pub fn mean_size_bytes(&self) -> f64 {
        (self.size_lognorm_mu + 0.5 * self.size_lognorm_sigma * self.size_lognorm_sigma).exp()
    }
}

/// An episode of elevated traffic on one class, partly aimed at files that
/// have never been requested before.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub start: Timestamp,
    pub end: Timestamp,
    pub class_label: String,
    pub rate_multiplier: f64,
    pub fresh_fraction: f64,
}

impl CampaignSpec {
    pub fn is_active(&self, at: Timestamp) -> bool {
        self.start <= at && at < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Horizon {
    pub start: Timestamp,
    pub end: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSpec {
    pub classes: Vec<FileClassSpec>,
    #[serde(default)]
    pub campaigns: Vec<CampaignSpec>,
    pub horizon: Horizon,
    #[serde(default)]
    pub rng_seed: u64,
}

impl WorkloadSpec {
    pub fn class(&self, label: &str) -> Option<&FileClassSpec> {
        self.classes.iter().find(|c| c.class_label == label)
    }

    pub fn class_mut(&mut self, label: &str) -> Option<&mut FileClassSpec> {
        self.classes.iter_mut().find(|c| c.class_label == label)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    /// Expected number of requests over the horizon.
    pub fn expected_requests(&self) -> f64 {
        let hour = crate::time::MILLIS_PER_HOUR;
        let mut total = 0.0;
        let mut slot = self.horizon.start;
        while slot < self.horizon.end {
            let len_h = (self.horizon.end.as_millis() - slot.as_millis()).min(hour) as f64 / hour as f64;
            for c in &self.classes {
                total += c.request_rate_per_hour * self.rate_multiplier(&c.class_label, slot) * len_h;
            }
            slot = slot.add_millis(hour);
        }
        total
    }

    /// Product of the multipliers of campaigns active on `label` at `at`.
    pub fn rate_multiplier(&self, label: &str, at: Timestamp) -> f64 {
        self.campaigns.iter().filter(|c| c.class_label == label && c.is_active(at)).map(|c| c.rate_multiplier).product()
    }

    /// Fresh-file fraction of the first campaign active on `label` at `at`.
    pub fn fresh_fraction(&self, label: &str, at: Timestamp) -> f64 {
        self.campaigns.iter().find(|c| c.class_label == label && c.is_active(at)).map_or(0.0, |c| c.fresh_fraction)
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        let invalid = |field: String, reason: &str| Err(WorkloadError::InvalidSpec { field, reason: reason.to_owned() });
        if self.horizon.start >= self.horizon.end {
            return invalid("horizon".into(), "start must precede end");
        }
        let mut labels = HashSet::new();
        for (i, c) in self.classes.iter().enumerate() {
            let field = |name: &str| format!("classes[{i}].{name}");
            if c.class_label.is_empty() {
                return invalid(field("class_label"), "must be non-empty");
            }
            if !labels.insert(c.class_label.as_str()) {
                return invalid(field("class_label"), "duplicate label");
            }
            if c.population == 0 {
                return invalid(field("population"), "must be at least 1");
            }
            if !c.size_lognorm_mu.is_finite() {
                return invalid(field("size_lognorm_mu"), "must be finite");
            }
            if !(c.size_lognorm_sigma >= 0.0 && c.size_lognorm_sigma.is_finite()) {
                return invalid(field("size_lognorm_sigma"), "must be finite and non-negative");
            }
            if !(c.zipf_exponent >= 0.0 && c.zipf_exponent.is_finite()) {
                return invalid(field("zipf_exponent"), "must be finite and non-negative");
            }
            if !(c.request_rate_per_hour >= 0.0 && c.request_rate_per_hour.is_finite()) {
                return invalid(field("request_rate_per_hour"), "must be finite and non-negative");
            }
        }
        for (i, c) in self.campaigns.iter().enumerate() {
            let field = |name: &str| format!("campaigns[{i}].{name}");
            if !labels.contains(c.class_label.as_str()) {
                return invalid(field("class_label"), "does not name a class");
            }
            if c.start >= c.end {
                return invalid(field("start"), "must precede end");
            }
            if !(c.rate_multiplier >= 1.0 && c.rate_multiplier.is_finite()) {
                return invalid(field("rate_multiplier"), "must be at least 1");
            }
            if !(0.0..=1.0).contains(&c.fresh_fraction) {
                return invalid(field("fresh_fraction"), "must lie in [0, 1]");
            }
        }
        Ok(())
    }
}
