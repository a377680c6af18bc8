use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson, Zipf};

use super::spec::{FileClassSpec, WorkloadSpec};
use super::WorkloadError;
use crate::hash::stable_hash;
use crate::time::{Timestamp, MILLIS_PER_HOUR};
use crate::trace::{AccessRecord, Trace};

pub fn popular_file_id(class_label: &str, rank: u64) -> String {
    format!("{class_label}-{rank:07}")
}

pub fn fresh_file_id(class_label: &str, n: u64) -> String {
    format!("{class_label}-fresh-{n:07}")
}

/// Size of a file, drawn once from the class lognormal. The draw is keyed on
/// (seed, file id) so it does not depend on request order.
pub fn file_size(class: &FileClassSpec, file_id: &str, seed: u64) -> u64 {
    let key = stable_hash(&[&seed.to_le_bytes(), class.class_label.as_bytes(), file_id.as_bytes()]);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let draw = if class.size_lognorm_sigma > 0.0 {
        LogNormal::new(class.size_lognorm_mu, class.size_lognorm_sigma).expect("validated").sample(&mut rng)
    } else {
        class.size_lognorm_mu.exp()
    };
    (draw.round() as u64).max(1)
}

struct ClassState<'a> {
    spec: &'a FileClassSpec,
    zipf: Zipf<f64>,
    fresh_issued: u64,
    sizes: HashMap<String, u64>,
}

/// Draws a request stream: per-hour Poisson arrival counts per class
/// (campaign-modulated), uniform arrival times within the hour, Zipf file
/// ranks, and fresh never-seen files for the campaign's fresh fraction.
pub fn generate(spec: &WorkloadSpec) -> Result<Trace, WorkloadError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut classes: Vec<ClassState> = spec
        .classes
        .iter()
        .map(|c| ClassState {
            spec: c,
            zipf: Zipf::new(c.population as f64, c.zipf_exponent).expect("validated"),
            fresh_issued: 0,
            sizes: HashMap::new(),
        })
        .collect();

    let mut records = Vec::new();
    let mut slot_records: Vec<(i64, AccessRecord)> = Vec::new();
    let mut slot = spec.horizon.start;
    while slot < spec.horizon.end {
        let slot_len = (spec.horizon.end.as_millis() - slot.as_millis()).min(MILLIS_PER_HOUR);
        slot_records.clear();
        for class in classes.iter_mut() {
            let label = class.spec.class_label.as_str();
            let lambda =
                class.spec.request_rate_per_hour * spec.rate_multiplier(label, slot) * slot_len as f64 / MILLIS_PER_HOUR as f64;
            if lambda <= 0.0 {
                continue;
            }
            let n = Poisson::new(lambda)
                .map_err(|e| WorkloadError::InvalidSpec { field: label.to_owned(), reason: e.to_string() })?
                .sample(&mut rng) as u64;
            let fresh_fraction = spec.fresh_fraction(label, slot);
            for _ in 0..n {
                let offset = rng.random_range(0..slot_len);
                let file_id = if fresh_fraction > 0.0 && rng.random::<f64>() < fresh_fraction {
                    class.fresh_issued += 1;
                    fresh_file_id(label, class.fresh_issued)
                } else {
                    popular_file_id(label, class.zipf.sample(&mut rng) as u64)
                };
                let size = *class.sizes.entry(file_id.clone()).or_insert_with(|| file_size(class.spec, &file_id, spec.rng_seed));
                slot_records.push((offset, AccessRecord::request(slot.add_millis(offset), file_id, label, size)));
            }
        }
        // stable: ties keep class order, then draw order
        slot_records.sort_by_key(|(offset, _)| *offset);
        records.extend(slot_records.drain(..).map(|(_, r)| r));
        slot = slot.add_millis(slot_len);
    }
    Ok(Trace::new(format!("synthetic:seed={}", spec.rng_seed), records))
}

/// Zipf pmf over ranks 1..=n, computed directly.
pub fn zipf_pmf(n: u64, exponent: f64) -> Vec<f64> {
    let weights: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-exponent)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Reference start of the default measurement year.
pub fn default_horizon_start() -> Timestamp {
    Timestamp::from_ymd_hms(2021, 7, 1, 0, 0, 0).expect("valid date")
}
