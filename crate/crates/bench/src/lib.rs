//! Shared inputs for the benchmarks.

use cachecast::forecast::LstmParams;
use cachecast::simulate::{default_socal_federation, simulate};
use cachecast::trace::Trace;
use cachecast::workload::{default_socal_workload, generate};
use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unresolved requests from the default workload at `scale`.
pub fn requests(scale: f64) -> Trace {
    generate(&default_socal_workload(scale)).expect("default workload is valid")
}

/// `requests(scale)` resolved by the default unified federation.
pub fn resolved(scale: f64) -> Trace {
    simulate(&requests(scale), &default_socal_federation(scale)).expect("default federation is valid").resolved
}

/// A randomly initialized model and a batch of scaled windows.
pub fn lstm_batch(hidden: usize, batch: usize, window: usize) -> (LstmParams<f32>, Array3<f32>) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let params = LstmParams::init(8, hidden, &mut rng);
    let x = Array3::from_shape_simple_fn((batch, window, 8), || rng.random::<f32>());
    (params, x)
}
