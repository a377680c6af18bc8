use rand::Rng;
use rand_distr::{Distribution, LogNormal};

use super::spec::ThroughputModelSpec;
use crate::trace::Outcome;

/// Achieved rate before jitter: the ceiling scaled by `size / (size + ramp)`.
pub fn ramped_rate(size_bytes: u64, max_bps: f64, ramp_bytes: f64) -> f64 {
    let size = size_bytes as f64;
    max_bps * size / (size + ramp_bytes)
}

/// Duration of one transfer. Misses use the WAN ceiling and hits the LAN
/// ceiling. Exactly one jitter draw is taken from `rng` when sigma > 0.
pub fn model_transfer_seconds<R: Rng + ?Sized>(
    size_bytes: u64,
    outcome: Outcome,
    model: &ThroughputModelSpec,
    rng: &mut R,
) -> f64 {
    let max_bps = match outcome {
        Outcome::Hit => model.lan_max_bps,
        _ => model.wan_max_bps,
    };
    let jitter = if model.jitter_lognorm_sigma > 0.0 {
        LogNormal::new(0.0, model.jitter_lognorm_sigma).expect("sigma validated").sample(rng)
    } else {
        1.0
    };
    size_bytes as f64 / (ramped_rate(size_bytes, max_bps, model.ramp_bytes) * jitter)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn model(sigma: f64) -> ThroughputModelSpec {
        ThroughputModelSpec { wan_max_bps: 1e8, lan_max_bps: 1e9, ramp_bytes: 1e6, jitter_lognorm_sigma: sigma }
    }

    #[test]
    fn large_transfers_approach_the_ceiling() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let size = 1_000_000_000_000u64;
        let t = model_transfer_seconds(size, Outcome::Miss, &model(0.0), &mut rng);
        let ideal = size as f64 / 1e8;
        assert!((t - ideal).abs() / ideal < 0.01);
    }

    #[test]
    fn ramp_size_gets_half_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = model_transfer_seconds(1_000_000, Outcome::Hit, &model(0.0), &mut rng);
        let rate = 1_000_000.0 / t;
        assert!((rate - 5e8).abs() < 1e-3, "{rate}");
    }

    #[test]
    fn large_files_see_higher_wan_throughput() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = model(0.5);
        let mean_rate = |size: u64, rng: &mut ChaCha8Rng| {
            (0..5000).map(|_| size as f64 / model_transfer_seconds(size, Outcome::Miss, &m, rng)).sum::<f64>() / 5000.0
        };
        let small = mean_rate(100_000, &mut rng);
        let large = mean_rate(3_300_000_000, &mut rng);
        assert!(large > small, "{large} vs {small}");
    }

    #[test]
    fn deterministic_given_rng_state() {
        let m = model(0.3);
        let a: Vec<f64> = {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            (0..10).map(|_| model_transfer_seconds(5000, Outcome::Miss, &m, &mut rng)).collect()
        };
        let b: Vec<f64> = {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            (0..10).map(|_| model_transfer_seconds(5000, Outcome::Miss, &m, &mut rng)).collect()
        };
        assert_eq!(a, b);
    }
}
