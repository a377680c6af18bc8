use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::spec::NodeSpec;
use crate::trace::Outcome;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("file of {size_bytes} bytes exceeds the admission limit of {limit_bytes} bytes")]
pub struct UnadmissibleSize {
    pub size_bytes: u64,
    pub limit_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvictedFile {
    pub file_id: String,
    pub file_class: String,
    pub size_bytes: u64,
}

#[derive(Debug, Clone)]
struct Entry {
    size_bytes: u64,
    file_class: String,
    tick: u64,
}

/// One cache node: LRU residency with high/low watermark eviction.
///
/// Recency is a logical clock. `recency` maps the tick of each file's last
/// access to its id, so the least recently used file is the first entry.
#[derive(Debug, Clone)]
pub struct CacheNodeState {
    spec: NodeSpec,
    high_limit: u64,
    low_limit: u64,
    resident: HashMap<String, Entry>,
    recency: BTreeMap<u64, String>,
    used_bytes: u64,
    clock: u64,
}

impl CacheNodeState {
    pub fn new(spec: NodeSpec) -> Self {
        CacheNodeState {
            high_limit: spec.high_limit(),
            low_limit: spec.low_limit(),
            spec,
            resident: HashMap::new(),
            recency: BTreeMap::new(),
            used_bytes: 0,
            clock: 0,
        }
    }

    pub fn spec(&self) -> &NodeSpec {
        &self.spec
    }

    pub fn used_bytes(&self) -> u64 {
        self.used_bytes
    }

    pub fn high_limit(&self) -> u64 {
        self.high_limit
    }

    pub fn len(&self) -> usize {
        self.resident.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resident.is_empty()
    }

    pub fn contains(&self, file_id: &str) -> bool {
        self.resident.contains_key(file_id)
    }

    /// Resident file ids, most recently used first.
    pub fn resident_mru(&self) -> impl Iterator<Item = &str> + '_ {
        self.recency.values().rev().map(String::as_str)
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Hit iff resident; a hit moves the file to the most-recent position.
    pub fn lookup_and_touch(&mut self, file_id: &str) -> Outcome {
        let now = self.clock + 1;
        match self.resident.get_mut(file_id) {
            Some(entry) => {
                let id = self.recency.remove(&entry.tick).expect("recency index out of sync");
                entry.tick = now;
                self.recency.insert(now, id);
                self.clock = now;
                Outcome::Hit
            }
            None => Outcome::Miss,
        }
    }

    /// Admits a file at the most-recent position. If the admission would push
    /// usage above the high watermark, least recently used files are evicted
    /// until usage plus the new file fits under the low watermark. Returns the
    /// evicted files in eviction order.
    pub fn evict_and_admit(
        &mut self,
        file_id: &str,
        file_class: &str,
        size_bytes: u64,
    ) -> Result<Vec<EvictedFile>, UnadmissibleSize> {
        if size_bytes > self.low_limit {
            return Err(UnadmissibleSize { size_bytes, limit_bytes: self.low_limit });
        }
        if self.contains(file_id) {
            self.lookup_and_touch(file_id);
            return Ok(Vec::new());
        }
        let mut evicted = Vec::new();
        if self.used_bytes + size_bytes > self.high_limit {
            while self.used_bytes + size_bytes > self.low_limit {
                let (_, id) = self.recency.pop_first().expect("usage is positive so something is resident");
                let entry = self.resident.remove(&id).expect("recency index out of sync");
                self.used_bytes -= entry.size_bytes;
                evicted.push(EvictedFile { file_id: id, file_class: entry.file_class, size_bytes: entry.size_bytes });
            }
        }
        let tick = self.tick();
        self.recency.insert(tick, file_id.to_owned());
        self.resident.insert(file_id.to_owned(), Entry { size_bytes, file_class: file_class.to_owned(), tick });
        self.used_bytes += size_bytes;
        Ok(evicted)
    }
}
