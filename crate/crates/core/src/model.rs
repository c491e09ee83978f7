//! Model files: everything needed to decode, in one JSON document.
//!
//! A model file stores the alphabet, the pattern texts, the feature
//! configuration, the compiled product machine, and the three weight
//! families as string-keyed maps (`kind|field|field|field`). Weight values
//! round-trip bit-exactly: the JSON writer emits the shortest
//! representation that parses back to the identical float.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::crf::build_lattice;
use crate::error::{Error, Result};
use crate::machine::{PatternMachine, PatternSet};
use crate::potentials::{Feature, FeatureConfig, ModelParams};

/// A loaded, ready-to-run model.
#[derive(Debug, Clone)]
pub struct Model {
    pub alphabet: Alphabet,
    pub patterns: PatternSet,
    pub machine: PatternMachine,
    pub params: ModelParams,
    pub config: FeatureConfig,
}

impl Model {
    /// Viterbi decoding of one input sequence.
    pub fn decode(&self, x: &[char]) -> Vec<char> {
        build_lattice(&self.machine, &self.params, &self.config, x).viterbi()
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    alphabet: String,
    patterns: Vec<String>,
    feature_config: FeatureConfig,
    machine: PatternMachine,
    transition_weights: BTreeMap<String, f64>,
    emission_weights: BTreeMap<String, f64>,
    pattern_weights: BTreeMap<String, f64>,
}

/// Serializes a model to pretty-printed JSON bytes.
pub fn save_model_bytes(
    patterns: &PatternSet,
    machine: &PatternMachine,
    params: &ModelParams,
    config: &FeatureConfig,
) -> Result<Vec<u8>> {
    let mut transition_weights = BTreeMap::new();
    let mut emission_weights = BTreeMap::new();
    let mut pattern_weights = BTreeMap::new();
    for (f, v) in params.iter_all() {
        match f {
            Feature::Transition { .. } => {
                transition_weights.insert(f.to_string(), v);
            }
            Feature::Emission { .. } => {
                if v != 0.0 {
                    emission_weights.insert(f.to_string(), v);
                }
            }
            _ => {
                if v != 0.0 {
                    pattern_weights.insert(f.to_string(), v);
                }
            }
        }
    }
    let file = ModelFile {
        alphabet: patterns.alphabet().as_string(),
        patterns: patterns.source_texts(),
        feature_config: config.clone(),
        machine: machine.clone(),
        transition_weights,
        emission_weights,
        pattern_weights,
    };
    let mut bytes = serde_json::to_vec_pretty(&file)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Loads a model, recompiling the pattern set and checking that the stored
/// machine matches what its patterns produce.
pub fn load_model_bytes(bytes: &[u8]) -> Result<Model> {
    let file: ModelFile = serde_json::from_slice(bytes)?;
    let alphabet = Alphabet::new(&file.alphabet)?;
    let patterns = PatternSet::compile_strings(&alphabet, &file.patterns)?;
    let rebuilt = PatternMachine::build(&patterns)?;
    if rebuilt != file.machine {
        return Err(Error::Data(
            "model file is inconsistent: stored machine does not match its patterns".into(),
        ));
    }
    file.feature_config.validate()?;
    let mut params = ModelParams::new(&alphabet);
    for maps in [
        &file.transition_weights,
        &file.emission_weights,
        &file.pattern_weights,
    ] {
        for (key, &value) in maps {
            let feature: Feature = key.parse()?;
            params.set(feature, value);
        }
    }
    Ok(Model {
        alphabet,
        patterns,
        machine: file.machine,
        params,
        config: file.feature_config,
    })
}

pub fn save_model_to_path(
    path: &Path,
    patterns: &PatternSet,
    machine: &PatternMachine,
    params: &ModelParams,
    config: &FeatureConfig,
) -> Result<()> {
    let bytes = save_model_bytes(patterns, machine, params, config)?;
    write_atomic(path, &bytes)
}

pub fn load_model_from_path(path: &Path) -> Result<Model> {
    let bytes = std::fs::read(path)?;
    load_model_bytes(&bytes)
}

/// Writes via a temporary file in the target directory followed by a
/// rename, so readers never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "out".into())
        )),
        None => std::path::PathBuf::from(format!(
            ".{}.tmp",
            path.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "out".into())
        )),
    };
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_model() -> (PatternSet, PatternMachine, ModelParams, FeatureConfig) {
        let alphabet = Alphabet::new("ABX").unwrap();
        let patterns = PatternSet::compile(&alphabet, &["AX*A", "^BX*B$"]).unwrap();
        let machine = PatternMachine::build(&patterns).unwrap();
        let mut params = ModelParams::new(&alphabet);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        params.set(
            Feature::Transition {
                prev: 'A',
                next: 'X',
            },
            rng.random_range(-2.0..2.0),
        );
        params.set(
            Feature::Emission {
                offset: -1,
                token: '7',
                label: 'B',
            },
            0.1 + 0.2, // deliberately not exactly representable
        );
        params.set(Feature::PatternBias { pattern: 1 }, rng.random_range(-2.0..2.0));
        params.set(
            Feature::PatternAnchor {
                pattern: 0,
                position: 1,
                token: '3',
            },
            -1.7e-13,
        );
        let config = FeatureConfig {
            max_position: 7,
            ..FeatureConfig::default()
        };
        (patterns, machine, params, config)
    }

    #[test]
    fn model_files_roundtrip_bit_exactly() {
        let (patterns, machine, params, config) = small_model();
        let bytes = save_model_bytes(&patterns, &machine, &params, &config).unwrap();
        let model = load_model_bytes(&bytes).unwrap();
        assert_eq!(model.params, params);
        assert_eq!(model.machine, machine);
        assert_eq!(model.config, config);
        assert_eq!(model.alphabet.as_string(), "ABX");
        let bytes2 =
            save_model_bytes(&model.patterns, &model.machine, &model.params, &model.config)
                .unwrap();
        assert_eq!(bytes, bytes2, "serialization must be stable");
    }

    #[test]
    fn tampered_machine_is_rejected() {
        let (patterns, machine, params, config) = small_model();
        let bytes = save_model_bytes(&patterns, &machine, &params, &config).unwrap();
        let mut value: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        value["patterns"][0] = serde_json::Value::String("AX*X".into());
        let tampered = serde_json::to_vec(&value).unwrap();
        assert!(load_model_bytes(&tampered).is_err());
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn decode_runs_on_a_loaded_model() {
        let (patterns, machine, params, config) = small_model();
        let bytes = save_model_bytes(&patterns, &machine, &params, &config).unwrap();
        let model = load_model_bytes(&bytes).unwrap();
        let x: Vec<char> = "000".chars().collect();
        let y = model.decode(&x);
        assert_eq!(y.len(), 3);
        for c in y {
            assert!(model.alphabet.index_of(c).is_some());
        }
    }
}
