//! Capacity-weighted rendezvous (highest random weight) routing.
//!
//! Each eligible node scores a file as `weight / -ln(u)` with `u` a stable
//! hash of (node, file) mapped into (0, 1); the top score wins. A node wins
//! with probability proportional to its weight, and removing a node only moves
//! the files that node owned.

use std::collections::HashMap;

use super::spec::{FederationSpec, PolicySpec};
use super::SimulateError;
use crate::hash::{stable_hash, unit_open};

pub fn rendezvous_score(node_id: &str, weight: f64, file_id: &str) -> f64 {
    let u = unit_open(stable_hash(&[node_id.as_bytes(), file_id.as_bytes()]));
    weight / -u.ln()
}

#[derive(Debug, Clone)]
struct Candidate {
    index: usize,
    node_id: String,
    weight: f64,
}

/// Precomputed eligible node sets for a federation.
#[derive(Debug, Clone)]
pub struct Router {
    all: Vec<Candidate>,
    by_class: Option<HashMap<String, Vec<Candidate>>>,
}

impl Router {
    pub fn new(federation: &FederationSpec) -> Self {
        let candidate = |index: usize| {
            let n = &federation.nodes[index];
            Candidate { index, node_id: n.node_id.clone(), weight: n.capacity_bytes as f64 }
        };
        let all = (0..federation.nodes.len()).map(candidate).collect();
        let by_class = match &federation.policy {
            PolicySpec::Partitioned { partition_map, .. } => Some(
                partition_map
                    .iter()
                    .map(|(class, ids)| {
                        let members = (0..federation.nodes.len())
                            .filter(|&i| ids.contains(&federation.nodes[i].node_id))
                            .map(candidate)
                            .collect();
                        (class.clone(), members)
                    })
                    .collect(),
            ),
            _ => None,
        };
        Router { all, by_class }
    }

    /// Index into `federation.nodes` of the node that owns `file_id`.
    pub fn route(&self, file_id: &str, file_class: &str) -> Result<usize, SimulateError> {
        let eligible = match &self.by_class {
            None => &self.all,
            Some(map) => map
                .get(file_class)
                .filter(|c| !c.is_empty())
                .ok_or_else(|| SimulateError::UnmappedClass { class: file_class.to_owned() })?,
        };
        let mut best: Option<(f64, usize)> = None;
        for c in eligible {
            let score = rendezvous_score(&c.node_id, c.weight, file_id);
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, c.index));
            }
        }
        best.map(|(_, i)| i).ok_or_else(|| SimulateError::UnmappedClass { class: file_class.to_owned() })
    }
}

/// Node id owning `file_id` under the federation's policy.
pub fn route<'a>(file_id: &str, file_class: &str, federation: &'a FederationSpec) -> Result<&'a str, SimulateError> {
    let index = Router::new(federation).route(file_id, file_class)?;
    Ok(&federation.nodes[index].node_id)
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use super::*;
    use crate::simulate::spec::NodeSpec;

    #[test]
    fn single_node_takes_everything() {
        let f = FederationSpec::unified(vec![NodeSpec::new("only", 10)]);
        for i in 0..100 {
            assert_eq!(route(&format!("file-{i}"), "S", &f).unwrap(), "only");
        }
    }

    #[test]
    fn routing_is_deterministic() {
        let f = crate::simulate::default_socal_federation(1e-6);
        let r = Router::new(&f);
        for i in 0..200 {
            let id = format!("f{i}");
            assert_eq!(r.route(&id, "S").unwrap(), r.route(&id, "S").unwrap());
        }
    }

    #[test]
    fn partitioned_respects_class_sets() {
        let nodes = vec![NodeSpec::new("a", 10), NodeSpec::new("b", 10), NodeSpec::new("c", 10)];
        let map: BTreeMap<String, BTreeSet<String>> =
            [("S".to_owned(), ["a".to_owned()].into()), ("L".to_owned(), ["b".to_owned(), "c".to_owned()].into())].into();
        let f = FederationSpec::unified(nodes).with_policy(PolicySpec::Partitioned { partition_map: map, allow_overlap: false });
        for i in 0..100 {
            let id = format!("f{i}");
            assert_eq!(route(&id, "S", &f).unwrap(), "a");
            assert_ne!(route(&id, "L", &f).unwrap(), "a");
        }
        assert!(matches!(route("x", "M", &f), Err(SimulateError::UnmappedClass { .. })));
    }
}
