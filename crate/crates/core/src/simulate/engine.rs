use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::node::CacheNodeState;
use super::routing::Router;
use super::spec::{FederationSpec, PolicySpec};
use super::throughput::model_transfer_seconds;
use super::SimulateError;
use crate::aggregate::{HitTally, SummaryStats};
use crate::trace::{AccessRecord, Outcome, Trace};

/// Node id recorded for requests that bypass the cache entirely.
pub const ORIGIN_NODE_ID: &str = "origin";

pub const SMALL_CLASS: &str = "S";
pub const LARGE_CLASS: &str = "L";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    #[serde(skip)]
    pub resolved: Trace,
    pub summary: SummaryStats,
    /// Bytes pulled over the wide-area network; equals `summary.miss_bytes`.
    pub wan_bytes: u64,
    pub evictions_total: u64,
    /// Evictions of class-S files caused by admitting class-L files.
    pub pollution_evictions: u64,
    pub per_class_summary: BTreeMap<String, SummaryStats>,
}

impl SimulationReport {
    pub fn class_misses(&self, class: &str) -> u64 {
        self.per_class_summary.get(class).map_or(0, |s| s.total_misses)
    }
}

/// Incremental federation simulator. Requests must arrive in time order.
pub struct Simulator<'a> {
    federation: &'a FederationSpec,
    router: Router,
    nodes: Vec<CacheNodeState>,
    rng: ChaCha8Rng,
    tally: HitTally,
    per_class: BTreeMap<String, HitTally>,
    evictions_total: u64,
    pollution_evictions: u64,
    uncached_misses: u64,
}

impl<'a> Simulator<'a> {
    pub fn new(federation: &'a FederationSpec) -> Result<Self, SimulateError> {
        federation.validate()?;
        Ok(Simulator {
            federation,
            router: Router::new(federation),
            nodes: federation.nodes.iter().cloned().map(CacheNodeState::new).collect(),
            rng: ChaCha8Rng::seed_from_u64(federation.rng_seed),
            tally: HitTally::default(),
            per_class: BTreeMap::new(),
            evictions_total: 0,
            pollution_evictions: 0,
            uncached_misses: 0,
        })
    }

    pub fn nodes(&self) -> &[CacheNodeState] {
        &self.nodes
    }

    pub fn evictions_total(&self) -> u64 {
        self.evictions_total
    }

    pub fn pollution_evictions(&self) -> u64 {
        self.pollution_evictions
    }

    /// Misses served without admission (bypassed or too large for their node).
    pub fn uncached_misses(&self) -> u64 {
        self.uncached_misses
    }

    fn bypasses(&self, size_bytes: u64) -> bool {
        matches!(self.federation.policy, PolicySpec::Bypass { bypass_threshold_bytes } if size_bytes >= bypass_threshold_bytes)
    }

    /// Resolves one request against the current cache state.
    pub fn step(&mut self, request: &AccessRecord) -> Result<AccessRecord, SimulateError> {
        let (outcome, node_id) = if self.bypasses(request.size_bytes) {
            self.uncached_misses += 1;
            (Outcome::Miss, ORIGIN_NODE_ID)
        } else {
            let index = self.router.route(&request.file_id, &request.file_class)?;
            let node = &mut self.nodes[index];
            let outcome = node.lookup_and_touch(&request.file_id);
            if outcome == Outcome::Miss {
                match node.evict_and_admit(&request.file_id, &request.file_class, request.size_bytes) {
                    Ok(evicted) => {
                        self.evictions_total += evicted.len() as u64;
                        if request.file_class == LARGE_CLASS {
                            self.pollution_evictions += evicted.iter().filter(|e| e.file_class == SMALL_CLASS).count() as u64;
                        }
                    }
                    Err(_) => self.uncached_misses += 1,
                }
            }
            (outcome, self.federation.nodes[index].node_id.as_str())
        };
        let seconds = model_transfer_seconds(request.size_bytes, outcome, &self.federation.throughput_model, &mut self.rng);
        self.tally.record(outcome, request.size_bytes);
        self.per_class.entry(request.file_class.clone()).or_default().record(outcome, request.size_bytes);
        Ok(request.resolved(outcome, node_id, seconds))
    }

    fn finish(self, resolved: Trace) -> Result<SimulationReport, SimulateError> {
        let summary = self.tally.summary()?;
        let per_class_summary = self
            .per_class
            .iter()
            .map(|(class, tally)| Ok((class.clone(), tally.summary()?)))
            .collect::<Result<_, SimulateError>>()?;
        Ok(SimulationReport {
            wan_bytes: summary.miss_bytes,
            summary,
            evictions_total: self.evictions_total,
            pollution_evictions: self.pollution_evictions,
            per_class_summary,
            resolved,
        })
    }
}

/// Runs a request stream (all outcomes Unknown, time-ordered) through the
/// federation and returns the resolved trace with its accounting.
pub fn simulate(requests: &Trace, federation: &FederationSpec) -> Result<SimulationReport, SimulateError> {
    let mut sim = Simulator::new(federation)?;
    let mut resolved = Vec::with_capacity(requests.len());
    for (index, r) in requests.records.iter().enumerate() {
        if r.outcome != Outcome::Unknown {
            return Err(SimulateError::ResolvedInput { index });
        }
        if index > 0 && r.ts < requests.records[index - 1].ts {
            return Err(SimulateError::OutOfOrder { index });
        }
        resolved.push(sim.step(r)?);
    }
    if resolved.is_empty() {
        return Err(SimulateError::EmptyTrace);
    }
    let resolved = Trace { records: resolved, metadata: requests.metadata.clone() };
    sim.finish(resolved)
}
