//! Deterministic simulation of a federated storage cache.
//!
//! Requests are routed to one node by capacity-weighted rendezvous hashing;
//! each node keeps an LRU with high/low watermark eviction. Three operating
//! policies are supported: unified, class-partitioned and large-file bypass.

mod engine;
mod node;
mod routing;
mod spec;
mod throughput;

use thiserror::Error;

use crate::aggregate::AggregateError;

pub use engine::{simulate, SimulationReport, Simulator, LARGE_CLASS, ORIGIN_NODE_ID, SMALL_CLASS};
pub use node::{CacheNodeState, EvictedFile, UnadmissibleSize};
pub use routing::{rendezvous_score, route, Router};
pub use spec::{
    default_socal_federation, socal_node_ids, socal_partition_policy, FederationSpec, NodeSpec, PolicySpec, ThroughputModelSpec,
    DEFAULT_HIGH_WATERMARK, DEFAULT_LOW_WATERMARK,
};
pub use throughput::{model_transfer_seconds, ramped_rate};

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("invalid federation: {0}")]
    InvalidFederation(String),
    #[error("file class {class:?} has no partition")]
    UnmappedClass { class: String },
    #[error("request {index} already has an outcome")]
    ResolvedInput { index: usize },
    #[error("request {index} is earlier than its predecessor")]
    OutOfOrder { index: usize },
    #[error("no requests to simulate")]
    EmptyTrace,
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
}
