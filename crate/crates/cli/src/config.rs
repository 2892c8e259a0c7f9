//! Run configuration: a `SimConfig` document plus an output directory and an
//! optional physical-parameter block that replaces `params`.

use std::path::{Path, PathBuf};

use filmspec::analysis::{nondimensionalize, PhysicalParams, Scaling};
use filmspec::integrator::SimConfig;
use filmspec::model::DEFAULT_N_TRUNC;
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use crate::manifest::{content_hash, MANIFEST_FORMAT};
use crate::{CliError, CliResult};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub physical: Option<PhysicalParams>,
    pub scaling: Option<Scaling>,
    pub out_dir: Option<PathBuf>,
    /// Normalized document; the content hash is taken over its JSON bytes.
    pub document: Value,
}

impl RunConfig {
    pub fn hash(&self) -> String {
        content_hash(&self.document)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Deserializes `v`, reporting the failing field as a dotted path below `prefix`.
pub fn from_value<T: DeserializeOwned>(v: Value, prefix: &str) -> CliResult<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix, inner.as_str()) {
            ("", ".") => String::new(),
            (p, ".") => p.to_string(),
            ("", q) => q.to_string(),
            (p, q) => format!("{p}.{q}"),
        };
        if path.is_empty() {
            usage(format!("config: {}", e.inner()))
        } else {
            usage(format!("config field `{path}`: {}", e.inner()))
        }
    })
}

/// Reads a JSON file; syntax errors carry line and column.
pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Loads a run configuration, or the configuration recorded in a manifest.
pub fn load_run_config(path: &Path, seed: Option<u64>) -> CliResult<RunConfig> {
    let mut doc = read_json(path)?;
    let is_manifest = doc.get("format").and_then(Value::as_str) == Some(MANIFEST_FORMAT);
    if is_manifest {
        let recorded = doc
            .get("config_hash")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| usage("manifest: missing `config_hash`"))?;
        doc = doc
            .get_mut("config")
            .map(Value::take)
            .ok_or_else(|| usage("manifest: missing `config`"))?;
        if content_hash(&doc) != recorded {
            return Err(usage("manifest: `config` does not match `config_hash`"));
        }
    }
    if let Some(seed) = seed {
        override_seed(&mut doc, seed)?;
    }
    RunConfig::from_document(doc, path.parent())
}

/// Replaces the seed of random initial data.
pub fn override_seed(doc: &mut Value, seed: u64) -> CliResult<()> {
    let initial = doc
        .get_mut("initial")
        .and_then(Value::as_object_mut)
        .ok_or_else(|| usage("--seed: config has no `initial` object"))?;
    if initial.get("kind").and_then(Value::as_str) != Some("random") {
        return Err(usage("--seed applies only to `random` initial data"));
    }
    initial.insert("seed".into(), json!(seed));
    Ok(())
}

impl RunConfig {
    /// Validates a configuration document. Relative snapshot paths are
    /// resolved against `base`.
    pub fn from_document(mut doc: Value, base: Option<&Path>) -> CliResult<Self> {
        let obj = doc
            .as_object_mut()
            .ok_or_else(|| usage("config: expected a JSON object"))?;
        if let (Some(base), Some(initial)) = (base, obj.get_mut("initial").and_then(Value::as_object_mut)) {
            resolve_snapshot_path(initial, base);
        }
        let document = doc.clone();
        let mut obj = match doc {
            Value::Object(m) => m,
            _ => unreachable!(),
        };

        let out_dir = match obj.remove("out_dir") {
            Some(v) => Some(from_value::<PathBuf>(v, "out_dir")?),
            None => None,
        };
        let physical_block = obj.remove("physical");
        let (physical, scaling) = match (obj.contains_key("params"), physical_block) {
            (true, Some(_)) => {
                return Err(usage(
                    "config: `params` and `physical` are mutually exclusive; give exactly one",
                ))
            }
            (false, None) => {
                return Err(usage(
                    "config field `params`: missing (give exactly one of `params` or `physical`)",
                ))
            }
            (true, None) => (None, None),
            (false, Some(mut block)) => {
                let n_trunc = match block.as_object_mut().and_then(|m| m.remove("n_trunc")) {
                    Some(v) => from_value::<usize>(v, "physical.n_trunc")?,
                    None => DEFAULT_N_TRUNC,
                };
                let phys: PhysicalParams = from_value(block, "physical")?;
                let s = nondimensionalize(&phys).map_err(|e| usage(format!("config field `physical`: {e}")))?;
                obj.insert("params".into(), json!({ "c1": s.c1, "c2": s.c2, "n_trunc": n_trunc }));
                (Some(phys), Some(s))
            }
        };

        let sim: SimConfig = from_value(Value::Object(obj), "")?;
        sim.validate().map_err(|e| usage(format!("config: {e}")))?;
        Ok(Self {
            sim,
            physical,
            scaling,
            out_dir,
            document,
        })
    }
}

fn resolve_snapshot_path(initial: &mut Map<String, Value>, base: &Path) {
    if initial.get("kind").and_then(Value::as_str) != Some("snapshot") {
        return;
    }
    if let Some(Value::String(p)) = initial.get("path") {
        let p = Path::new(p);
        if p.is_relative() {
            let joined = base.join(p).to_string_lossy().into_owned();
            initial.insert("path".into(), Value::String(joined));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Value {
        json!({
            "grid": { "dim": 1, "points": 32 },
            "params": { "c1": 0.5, "c2": 1.0 },
            "initial": { "kind": "modes", "modes": [{ "k": [1], "amplitude": 0.01 }] },
            "t_end": 0.1
        })
    }

    fn err(doc: Value) -> String {
        match RunConfig::from_document(doc, None) {
            Err(CliError::Usage(m)) => m,
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let rc = RunConfig::from_document(base(), None).unwrap();
        assert_eq!(rc.sim.params.n_trunc, DEFAULT_N_TRUNC);
        assert_eq!(rc.sim.dt_init, 1e-5);
        assert!(rc.physical.is_none());
        assert_eq!(rc.hash().len(), 64);
    }

    #[test]
    fn missing_params_names_the_field() {
        let mut doc = base();
        doc.as_object_mut().unwrap().remove("params");
        assert!(err(doc).contains("`params`"));
    }

    #[test]
    fn both_parameter_blocks_are_rejected() {
        let mut doc = base();
        doc["physical"] = json!({});
        assert!(err(doc).contains("mutually exclusive"));
    }

    #[test]
    fn nested_errors_carry_a_path() {
        let mut doc = base();
        doc["grid"]["points"] = json!("many");
        assert!(err(doc).contains("`grid.points`"));
        let mut doc = base();
        doc["tolerances"] = json!({ "step": "tight" });
        assert!(err(doc).contains("`tolerances.step`"));
        // tagged enums are buffered, so the path stops at the enum
        let mut doc = base();
        doc["initial"]["modes"][0]["amplitude"] = json!(null);
        assert!(err(doc).contains("`initial`"));
        let mut doc = base();
        doc["tolerence"] = json!(1);
        assert!(err(doc).contains("unknown field `tolerence`"));
    }

    #[test]
    fn semantic_errors_are_usage_errors() {
        let mut doc = base();
        doc["t_end"] = json!(-1.0);
        assert!(err(doc).contains("t_end"));
    }

    #[test]
    fn physical_block_is_nondimensionalized() {
        let mut doc = base();
        doc.as_object_mut().unwrap().remove("params");
        doc["physical"] = json!({
            "d": 0.5e-7, "V": 1e-22, "g0": 2.5e3, "M_mob": 4e-3,
            "c1_phys": 1.25e3, "c2_phys": 2.5e3, "u0_mass": 0.0, "n_trunc": 12
        });
        let rc = RunConfig::from_document(doc.clone(), None).unwrap();
        assert!((rc.sim.params.c1 - 0.5).abs() < 1e-15);
        assert!((rc.sim.params.c2 - 1.0).abs() < 1e-15);
        assert_eq!(rc.sim.params.n_trunc, 12);
        assert!((rc.scaling.unwrap().t_scale - 6.25e-9).abs() < 1e-20);

        doc["physical"]["g0"] = json!(-1.0);
        assert!(err(doc.clone()).contains("g0"));
        doc["physical"]["extra"] = json!(1.0);
        assert!(err(doc).contains("`physical"));
    }

    #[test]
    fn seed_override_requires_random_initial_data() {
        let mut doc = base();
        assert!(override_seed(&mut doc, 3).is_err());
        doc["initial"] = json!({ "kind": "random", "a0": 0.01, "seed": 1 });
        override_seed(&mut doc, 3).unwrap();
        assert_eq!(doc["initial"]["seed"], json!(3));
    }

    #[test]
    fn relative_snapshot_paths_follow_the_config() {
        let mut doc = base();
        doc["initial"] = json!({ "kind": "snapshot", "path": "v0.film" });
        let rc = RunConfig::from_document(doc, Some(Path::new("/data/runs"))).unwrap();
        assert_eq!(rc.document["initial"]["path"], json!("/data/runs/v0.film"));
    }
}
