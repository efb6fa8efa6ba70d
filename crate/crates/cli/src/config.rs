//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sqdopt_core::davidson::DavidsonConfig;
use sqdopt_core::drivers::AnsatzConfig;
use sqdopt_core::{Method, OptimizerConfig, RunSpec, SqdConfig};

use crate::error::{CliError, CliResult};

/// One experiment: a fixture, the methods to run on it, and the seeds to
/// repeat each method with. Every seed sets both the sampling seed and the
/// parameter initialization seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub fcidump: PathBuf,
    #[serde(default)]
    pub frozen: Vec<usize>,
    pub methods: Vec<Method>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fci_reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub sqd: SqdSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnsatzSection {
    pub layers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<(usize, usize)>>,
    pub init_scale: f64,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        let a = AnsatzConfig::default();
        Self { layers: a.layers, mask: a.mask, init_scale: a.init_scale }
    }
}

/// SQD settings; the seed comes from the experiment seed list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SqdSection {
    pub n_batches: usize,
    pub batch_size: usize,
    pub max_rounds: usize,
    pub energy_tol: f64,
    pub davidson: DavidsonConfig,
}

impl Default for SqdSection {
    fn default() -> Self {
        let s = SqdConfig::default();
        Self { n_batches: s.n_batches, batch_size: s.batch_size, max_rounds: s.max_rounds, energy_tol: s.energy_tol, davidson: s.davidson }
    }
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_k() -> usize {
    5
}

fn default_shots() -> usize {
    10_000
}

impl ExperimentConfig {
    pub fn new(fcidump: PathBuf, methods: Vec<Method>) -> Self {
        Self {
            fcidump,
            frozen: Vec::new(),
            methods,
            seeds: default_seeds(),
            k: default_k(),
            shots: default_shots(),
            fci_reference: None,
            output_dir: None,
            ansatz: AnsatzSection::default(),
            optimizer: OptimizerConfig::default(),
            sqd: SqdSection::default(),
        }
    }

    /// The same experiment restricted to one method and seed.
    pub fn single(&self, method: Method, seed: u64) -> Self {
        Self { methods: vec![method], seeds: vec![seed], ..self.clone() }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|source| CliError::Toml { path: path.to_path_buf(), source })?;
        // Relative fixture paths are relative to the config file.
        if cfg.fcidump.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.fcidump = dir.join(&cfg.fcidump);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.methods.is_empty() {
            return Err(CliError::Config("methods must list at least one method".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Config("seeds must list at least one seed".into()));
        }
        for spec in self.run_specs() {
            spec.validate()?;
        }
        Ok(())
    }

    pub fn run_specs(&self) -> Vec<RunSpec> {
        let mut out = Vec::new();
        for &method in &self.methods {
            for &seed in &self.seeds {
                out.push(RunSpec {
                    fcidump: self.fcidump.clone(),
                    frozen: self.frozen.clone(),
                    method,
                    k: self.k,
                    shots: self.shots,
                    ansatz: AnsatzConfig {
                        layers: self.ansatz.layers,
                        mask: self.ansatz.mask.clone(),
                        init_scale: self.ansatz.init_scale,
                        init_seed: seed,
                    },
                    optimizer: self.optimizer,
                    sqd: SqdConfig {
                        n_batches: self.sqd.n_batches,
                        batch_size: self.sqd.batch_size,
                        max_rounds: self.sqd.max_rounds,
                        energy_tol: self.sqd.energy_tol,
                        seed,
                        davidson: self.sqd.davidson,
                    },
                    seed,
                    fci_reference: self.fci_reference,
                });
            }
        }
        out
    }

    /// SHA-256 of the canonical TOML form. The output directory is excluded
    /// so moving results does not change their identity.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig { output_dir: None, ..self.clone() };
        let text = toml::to_string(&canonical).expect("config serializes");
        sha256_hex(text.as_bytes())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn file_hash(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(CliError::io(path))?;
    Ok(sha256_hex(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
fcidump = "h6.fcidump"
methods = ["sqdopt", "vqe"]
seeds = [1, 2]
"#;

    #[test]
    fn expands_methods_and_seeds() {
        let cfg: ExperimentConfig = toml::from_str(MINIMAL).unwrap();
        let specs = cfg.run_specs();
        assert_eq!(specs.len(), 4);
        assert_eq!(specs[1].method, Method::Sqdopt);
        assert_eq!((specs[1].seed, specs[1].ansatz.init_seed, specs[1].sqd.seed), (2, 2, 2));
        assert_eq!(specs[0].k, 5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nshots_per_basis = 3\n");
        assert!(toml::from_str::<ExperimentConfig>(&text).is_err());
        let text = format!("{MINIMAL}\n[optimizer]\nmaxiter = 3\n");
        assert!(toml::from_str::<ExperimentConfig>(&text).is_err());
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a: ExperimentConfig = toml::from_str(MINIMAL).unwrap();
        let b = ExperimentConfig { output_dir: Some("elsewhere".into()), ..a.clone() };
        let c = ExperimentConfig { shots: 7, ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn toml_round_trip() {
        let a: ExperimentConfig = toml::from_str(MINIMAL).unwrap();
        let b: ExperimentConfig = toml::from_str(&a.to_toml()).unwrap();
        assert_eq!(a, b);
    }
}
