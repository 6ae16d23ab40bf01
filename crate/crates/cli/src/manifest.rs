//! Run manifests: every emitted report carries the command line, digests of
//! its input files, the tolerances in force, and wall-clock per stage.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub tolerances: BTreeMap<String, f64>,
    pub localizing_order_convention: String,
    pub version: String,
    pub timings_seconds: BTreeMap<String, f64>,
}

#[derive(Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl RunManifest {
    pub fn new() -> Self {
        RunManifest {
            command: std::env::args().collect::<Vec<_>>().join(" "),
            inputs: Vec::new(),
            tolerances: BTreeMap::new(),
            localizing_order_convention:
                momdens_core::hierarchy::LOCALIZING_ORDER_CONVENTION.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timings_seconds: BTreeMap::new(),
        }
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex,
        });
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.to_string(), value);
    }

    pub fn timing(&mut self, stage: &str, seconds: f64) {
        self.timings_seconds.insert(stage.to_string(), seconds);
    }
}
