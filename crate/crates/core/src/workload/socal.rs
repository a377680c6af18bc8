use super::generate::default_horizon_start;
use super::spec::{CampaignSpec, FileClassSpec, Horizon, WorkloadSpec};
use crate::simulate::{LARGE_CLASS, SMALL_CLASS};
use crate::time::Timestamp;

/// Mean small-file size, bytes.
pub const SMALL_MEAN_BYTES: f64 = 30e6;
/// Mean large-file size, bytes.
pub const LARGE_MEAN_BYTES: f64 = 4.5e9;

const SMALL_SIGMA: f64 = 1.0;
const LARGE_SIGMA: f64 = 0.6;

// Hourly rates at scale 1. Outside the campaign 90% of requests are small;
// with the campaign multiplier the yearly mean is about 23,800 per day.
const SMALL_RATE: f64 = 794.2;
const LARGE_RATE: f64 = 88.25;
const CAMPAIGN_MULTIPLIER: f64 = 4.0;

// Calibrated against the default federation (see `calibrate`).
const SMALL_POPULATION: f64 = 1.679e6;
const LARGE_POPULATION: f64 = 1.5e6;
const SMALL_ZIPF: f64 = 0.825;
const LARGE_ZIPF: f64 = 0.7;
const CAMPAIGN_FRESH: f64 = 0.3;

fn lognorm_mu(mean: f64, sigma: f64) -> f64 {
    mean.ln() - 0.5 * sigma * sigma
}

pub fn campaign_window() -> (Timestamp, Timestamp) {
    (
        Timestamp::from_ymd_hms(2021, 10, 1, 0, 0, 0).expect("valid date"),
        Timestamp::from_ymd_hms(2022, 3, 1, 0, 0, 0).expect("valid date"),
    )
}

/// Two-class workload over July 2021 to June 2022: a hot small-file class "S",
/// a cold large-file class "L", and one October to February campaign on "L".
/// Rates and populations scale linearly with `scale`; pair it with
/// `default_socal_federation(scale)`.
pub fn default_socal_workload(scale: f64) -> WorkloadSpec {
    assert!(scale > 0.0 && scale <= 1.0, "scale must lie in (0, 1]");
    let population = |p: f64| ((p * scale).round() as u64).max(1);
    let (campaign_start, campaign_end) = campaign_window();
    WorkloadSpec {
        classes: vec![
            FileClassSpec {
                class_label: SMALL_CLASS.to_owned(),
                population: population(SMALL_POPULATION),
                size_lognorm_mu: lognorm_mu(SMALL_MEAN_BYTES, SMALL_SIGMA),
                size_lognorm_sigma: SMALL_SIGMA,
                zipf_exponent: SMALL_ZIPF,
                request_rate_per_hour: SMALL_RATE * scale,
            },
            FileClassSpec {
                class_label: LARGE_CLASS.to_owned(),
                population: population(LARGE_POPULATION),
                size_lognorm_mu: lognorm_mu(LARGE_MEAN_BYTES, LARGE_SIGMA),
                size_lognorm_sigma: LARGE_SIGMA,
                zipf_exponent: LARGE_ZIPF,
                request_rate_per_hour: LARGE_RATE * scale,
            },
        ],
        campaigns: vec![CampaignSpec {
            start: campaign_start,
            end: campaign_end,
            class_label: LARGE_CLASS.to_owned(),
            rate_multiplier: CAMPAIGN_MULTIPLIER,
            fresh_fraction: CAMPAIGN_FRESH,
        }],
        horizon: Horizon {
            start: default_horizon_start(),
            end: Timestamp::from_ymd_hms(2022, 7, 1, 0, 0, 0).expect("valid date"),
        },
        rng_seed: 2021,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::MILLIS_PER_DAY;

    #[test]
    fn daily_volume_matches_reference() {
        let spec = default_socal_workload(1.0);
        let days = (spec.horizon.end.as_millis() - spec.horizon.start.as_millis()) / MILLIS_PER_DAY;
        let daily = spec.expected_requests() / days as f64;
        assert!((daily - 23_808.0).abs() / 23_808.0 < 0.10, "{daily}");
    }

    #[test]
    fn large_files_exceed_threshold_on_average() {
        let spec = default_socal_workload(1.0);
        assert!(spec.class(LARGE_CLASS).unwrap().mean_size_bytes() >= 3.3e9);
        let small = spec.class(SMALL_CLASS).unwrap().mean_size_bytes();
        assert!((small - SMALL_MEAN_BYTES).abs() / SMALL_MEAN_BYTES < 1e-9);
    }

    #[test]
    fn rates_scale_linearly() {
        let a = default_socal_workload(1.0).expected_requests();
        let b = default_socal_workload(0.01).expected_requests();
        assert!((b / a - 0.01).abs() < 1e-9);
    }

    #[test]
    fn valid_at_tiny_scale() {
        default_socal_workload(1e-6).validate().unwrap();
    }
}
