use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Provenance record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub command_line: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    pub configs: Vec<Artifact>,
    pub inputs: Vec<Artifact>,
    /// Paths relative to the output directory.
    pub outputs: Vec<Artifact>,
    pub timings_ms: BTreeMap<String, f64>,
    #[serde(skip)]
    out_dir: PathBuf,
    #[serde(skip)]
    started: Instant,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn artifact(label: String, bytes: &[u8]) -> Artifact {
    Artifact { path: label, sha256: sha256_hex(bytes), bytes: bytes.len() as u64 }
}

impl RunManifest {
    pub fn new(out_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
        Ok(RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            command_line: std::env::args().collect(),
            seeds: BTreeMap::new(),
            configs: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings_ms: BTreeMap::new(),
            out_dir: out_dir.to_owned(),
            started: Instant::now(),
        })
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.to_owned(), seed);
    }

    pub fn config(&mut self, path: &Path, bytes: &[u8]) {
        self.configs.push(artifact(path.display().to_string(), bytes));
    }

    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(artifact(path.display().to_string(), bytes));
    }

    /// Writes `bytes` to `name` under the output directory and records it.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.push(artifact(name.to_owned(), bytes));
        Ok(path)
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timings_ms.insert(stage.to_owned(), t.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.timings_ms.insert("total".into(), self.started.elapsed().as_secs_f64() * 1e3);
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        let path = self.out_dir.join(MANIFEST_FILE);
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}
