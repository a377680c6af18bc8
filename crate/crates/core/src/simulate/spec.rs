use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::SimulateError;

pub const DEFAULT_HIGH_WATERMARK: f64 = 0.95;
pub const DEFAULT_LOW_WATERMARK: f64 = 0.90;

const TB: f64 = 1e12;

fn default_high() -> f64 {
    DEFAULT_HIGH_WATERMARK
}

fn default_low() -> f64 {
    DEFAULT_LOW_WATERMARK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub node_id: String,
    pub capacity_bytes: u64,
    #[serde(default = "default_high")]
    pub high_watermark: f64,
    #[serde(default = "default_low")]
    pub low_watermark: f64,
}

impl NodeSpec {
    pub fn new(node_id: impl Into<String>, capacity_bytes: u64) -> Self {
        NodeSpec {
            node_id: node_id.into(),
            capacity_bytes,
            high_watermark: DEFAULT_HIGH_WATERMARK,
            low_watermark: DEFAULT_LOW_WATERMARK,
        }
    }

    pub fn with_watermarks(mut self, high: f64, low: f64) -> Self {
        self.high_watermark = high;
        self.low_watermark = low;
        self
    }

    /// Usage ceiling enforced after every admission.
    pub fn high_limit(&self) -> u64 {
        (self.capacity_bytes as f64 * self.high_watermark).floor() as u64
    }

    /// Eviction stops once usage plus the incoming file fits under this.
    /// Also the largest admissible file size.
    pub fn low_limit(&self) -> u64 {
        (self.capacity_bytes as f64 * self.low_watermark).floor() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum PolicySpec {
    /// Every class may be cached on every node.
    Unified,
    /// Each class is confined to its own node subset.
    Partitioned {
        partition_map: BTreeMap<String, BTreeSet<String>>,
        #[serde(default)]
        allow_overlap: bool,
    },
    /// Requests at or above the threshold go straight to the origin.
    Bypass { bypass_threshold_bytes: u64 },
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Unified => "unified",
            PolicySpec::Partitioned { .. } => "partitioned",
            PolicySpec::Bypass { .. } => "bypass",
        }
    }
}

/// Saturating transfer-rate model: a transfer of `size` bytes achieves
/// `max_bps * size / (size + ramp_bytes)`, times lognormal jitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThroughputModelSpec {
    /// Ceiling for misses, served from the origin over the WAN.
    pub wan_max_bps: f64,
    /// Ceiling for hits, served from a regional cache node.
    pub lan_max_bps: f64,
    pub ramp_bytes: f64,
    #[serde(default)]
    pub jitter_lognorm_sigma: f64,
}

impl Default for ThroughputModelSpec {
    fn default() -> Self {
        ThroughputModelSpec { wan_max_bps: 5.0e8, lan_max_bps: 2.5e9, ramp_bytes: 1.0e9, jitter_lognorm_sigma: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationSpec {
    pub nodes: Vec<NodeSpec>,
    pub policy: PolicySpec,
    #[serde(default)]
    pub throughput_model: ThroughputModelSpec,
    #[serde(default)]
    pub rng_seed: u64,
}

impl FederationSpec {
    pub fn unified(nodes: Vec<NodeSpec>) -> Self {
        FederationSpec { nodes, policy: PolicySpec::Unified, throughput_model: ThroughputModelSpec::default(), rng_seed: 0 }
    }

    pub fn with_policy(mut self, policy: PolicySpec) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn total_capacity(&self) -> u64 {
        self.nodes.iter().map(|n| n.capacity_bytes).sum()
    }

    pub fn node_index(&self, node_id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.node_id == node_id)
    }

    pub fn validate(&self) -> Result<(), SimulateError> {
        let invalid = |msg: String| Err(SimulateError::InvalidFederation(msg));
        if self.nodes.is_empty() {
            return invalid("nodes: at least one node is required".into());
        }
        let mut seen = HashSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.node_id.is_empty() {
                return invalid(format!("nodes[{i}].node_id: must be non-empty"));
            }
            if !seen.insert(n.node_id.as_str()) {
                return invalid(format!("nodes[{i}].node_id: duplicate id {:?}", n.node_id));
            }
            if n.capacity_bytes == 0 {
                return invalid(format!("nodes[{i}].capacity_bytes: must be positive"));
            }
            if !(n.high_watermark > 0.0 && n.high_watermark <= 1.0) {
                return invalid(format!("nodes[{i}].high_watermark: must lie in (0, 1]"));
            }
            if !(n.low_watermark > 0.0 && n.low_watermark <= n.high_watermark) {
                return invalid(format!("nodes[{i}].low_watermark: must lie in (0, high_watermark]"));
            }
        }
        match &self.policy {
            PolicySpec::Unified => {}
            PolicySpec::Bypass { bypass_threshold_bytes } => {
                if *bypass_threshold_bytes == 0 {
                    return invalid("policy.bypass_threshold_bytes: must be positive".into());
                }
            }
            PolicySpec::Partitioned { partition_map, allow_overlap } => {
                if partition_map.is_empty() {
                    return invalid("policy.partition_map: must map at least one class".into());
                }
                let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
                for (class, nodes) in partition_map {
                    if nodes.is_empty() {
                        return invalid(format!("policy.partition_map.{class}: node set is empty"));
                    }
                    for node in nodes {
                        if !seen.contains(node.as_str()) {
                            return invalid(format!("policy.partition_map.{class}: unknown node {node:?}"));
                        }
                        if let Some(prev) = owner.insert(node, class) {
                            if !allow_overlap {
                                return invalid(format!(
                                    "policy.partition_map: node {node:?} is shared by classes {prev:?} and {class:?} (set allow_overlap = true to permit)"
                                ));
                            }
                        }
                    }
                }
            }
        }
        let t = &self.throughput_model;
        if !(t.wan_max_bps > 0.0 && t.lan_max_bps > 0.0 && t.ramp_bytes > 0.0) {
            return invalid("throughput_model: rates and ramp_bytes must be positive".into());
        }
        if t.lan_max_bps < t.wan_max_bps {
            return invalid("throughput_model.lan_max_bps: must be at least wan_max_bps".into());
        }
        if !(t.jitter_lognorm_sigma >= 0.0 && t.jitter_lognorm_sigma.is_finite()) {
            return invalid("throughput_model.jitter_lognorm_sigma: must be finite and non-negative".into());
        }
        Ok(())
    }
}

/// Node ids of the reference regional topology.
pub fn socal_node_ids() -> (Vec<String>, Vec<String>, String) {
    let caltech = (1..=11).map(|i| format!("caltech-{i:02}")).collect();
    let ucsd = (1..=12).map(|i| format!("ucsd-{i:02}")).collect();
    (caltech, ucsd, "esnet-sunnyvale".to_owned())
}

/// The 24-node regional federation: eleven nodes spaced linearly from 96 TB
/// to 388 TB, twelve 24 TB nodes and one 44 TB node, with every capacity
/// multiplied by `capacity_scale`.
pub fn default_socal_federation(capacity_scale: f64) -> FederationSpec {
    let (caltech, ucsd, esnet) = socal_node_ids();
    let scaled = |tb: f64| ((tb * TB * capacity_scale).round() as u64).max(1);
    let mut nodes: Vec<NodeSpec> = caltech
        .into_iter()
        .enumerate()
        .map(|(i, id)| NodeSpec::new(id, scaled(96.0 + (388.0 - 96.0) * i as f64 / 10.0)))
        .collect();
    nodes.extend(ucsd.into_iter().map(|id| NodeSpec::new(id, scaled(24.0))));
    nodes.push(NodeSpec::new(esnet, scaled(44.0)));
    FederationSpec::unified(nodes)
}

/// Small-format files on the UCSD nodes; large-format files on Caltech and
/// ESnet.
pub fn socal_partition_policy() -> PolicySpec {
    let (caltech, ucsd, esnet) = socal_node_ids();
    let mut large: BTreeSet<String> = caltech.into_iter().collect();
    large.insert(esnet);
    let mut partition_map = BTreeMap::new();
    partition_map.insert("S".to_owned(), ucsd.into_iter().collect());
    partition_map.insert("L".to_owned(), large);
    PolicySpec::Partitioned { partition_map, allow_overlap: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_topology_shape() {
        let f = default_socal_federation(1.0);
        assert_eq!(f.nodes.len(), 24);
        assert_eq!(f.nodes[0].capacity_bytes, 96_000_000_000_000);
        assert_eq!(f.nodes[10].capacity_bytes, 388_000_000_000_000);
        assert_eq!(f.nodes.iter().filter(|n| n.capacity_bytes == 24_000_000_000_000).count(), 12);
        assert_eq!(f.nodes[23].capacity_bytes, 44_000_000_000_000);
        // Linear spacing lands near 3 PB.
        let pb = f.total_capacity() as f64 / 1e15;
        assert!((2.9..3.1).contains(&pb), "{pb}");
        f.validate().unwrap();
        f.clone().with_policy(socal_partition_policy()).validate().unwrap();
    }

    #[test]
    fn validation_messages_name_fields() {
        let mut f = default_socal_federation(1e-6);
        f.nodes[3].low_watermark = 0.99;
        let msg = f.validate().unwrap_err().to_string();
        assert!(msg.contains("nodes[3].low_watermark"), "{msg}");

        let mut f = default_socal_federation(1e-6);
        f.nodes[1].node_id = f.nodes[0].node_id.clone();
        assert!(f.validate().unwrap_err().to_string().contains("duplicate"));
    }

    #[test]
    fn overlapping_partitions_need_opt_in() {
        let nodes = vec![NodeSpec::new("a", 10), NodeSpec::new("b", 10)];
        let map: BTreeMap<String, BTreeSet<String>> =
            [("S".to_owned(), ["a".to_owned()].into()), ("L".to_owned(), ["a".to_owned(), "b".to_owned()].into())].into();
        let f = FederationSpec::unified(nodes)
            .with_policy(PolicySpec::Partitioned { partition_map: map.clone(), allow_overlap: false });
        assert!(f.validate().is_err());
        let f = f.with_policy(PolicySpec::Partitioned { partition_map: map, allow_overlap: true });
        f.validate().unwrap();
    }

    #[test]
    fn watermark_limits() {
        let n = NodeSpec::new("a", 1000);
        assert_eq!((n.high_limit(), n.low_limit()), (950, 900));
    }
}
