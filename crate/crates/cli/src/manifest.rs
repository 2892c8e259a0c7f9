//! Run manifests and content hashes.

use filmspec::analysis::{check_conditions, BoundSet, ConditionMode, ConditionReport, PhysicalParams, Scaling};
use filmspec::integrator::{EnergyReport, SimConfig, SimEvent, StepStats, StopReason};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST_FORMAT: &str = "filmspec-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const NORMS_FILE: &str = "norms.csv";
pub const FINAL_SNAPSHOT_FILE: &str = "final.film";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Git blob hash over the compact JSON form of `doc`, computed with SHA-256:
/// `sha256("blob <len>\0" + bytes)`.
pub fn content_hash(doc: &Value) -> String {
    let bytes = serde_json::to_vec(doc).expect("JSON values always serialize");
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(&bytes);
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, Serialize)]
pub struct Conditions {
    pub existence: ConditionReport,
    pub regularity: ConditionReport,
    /// `None` when the initial Wiener norm is not below 1.
    pub smallness: Option<bool>,
}

impl Conditions {
    pub fn evaluate(c1: f64, c2: f64, bounds: Option<&BoundSet>) -> Self {
        Self {
            existence: check_conditions(c1, c2, ConditionMode::Existence),
            regularity: check_conditions(c1, c2, ConditionMode::Regularity),
            smallness: bounds.map(|b| b.cond_smallness),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SnapshotEntry {
    pub time: f64,
    pub file: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outputs {
    pub norms: String,
    pub norms_sha256: String,
    pub snapshots: Vec<SnapshotEntry>,
    pub final_snapshot: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub format: String,
    pub version: String,
    pub config_hash: String,
    /// The configuration as run; `simulate --config` accepts this manifest.
    pub config: Value,
    pub resolved: SimConfig,
    pub physical: Option<PhysicalParams>,
    pub scaling: Option<Scaling>,
    pub bounds: Option<BoundSet>,
    pub conditions: Conditions,
    pub stop: StopReason,
    pub final_time: f64,
    pub stats: StepStats,
    pub max_abs_mean: f64,
    pub envelope_holds: bool,
    pub energy: EnergyReport,
    pub events: Vec<SimEvent>,
    pub outputs: Outputs,
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn content_hash_matches_git_blob_layout() {
        // `printf '{}' | git hash-object --stdin` in a sha256 repository
        assert_eq!(
            content_hash(&json!({})),
            "f1763e2b60578aec547424aecd0574d432968c9d845353fcdc2e1ecb809596d2"
        );
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn content_hash_ignores_key_order_in_source_text() {
        let a: Value = serde_json::from_str(r#"{"a": 1, "b": [1, 2]}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"b": [1, 2], "a": 1}"#).unwrap();
        assert_eq!(content_hash(&a), content_hash(&b));
        assert_ne!(content_hash(&a), content_hash(&json!({"a": 2, "b": [1, 2]})));
    }
}
