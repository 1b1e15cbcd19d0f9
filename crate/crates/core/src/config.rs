//! Experiment configuration, read from a single TOML file.
//!
//! ```toml
//! protocol = "mdqfl"          # or "qfl"
//! n_devices = 10
//! rounds = 3
//! n_class = 2                 # labels per device in the l-cycle split
//! workers = 1
//!
//! [seeds]
//! data = 1
//! split = 2
//! device = 3
//!
//! [dataset]
//! n_train = 300
//! n_test = 100
//! pca_components = 4          # also the qubit count
//! validation_split = 0.8
//! source = { kind = "synthetic_blobs", dim = 16 }
//!
//! [model]
//! ansatz_reps = 3
//!
//! [optimizer]
//! kind = "cobyla"
//! maxiter = 5
//!
//! [clustering]
//! method = "kmeans"
//! seed = 4
//!
//! [policy]
//! modes = [1, 1, 1]
//!
//! [selection]
//! kind = "loss_argmin"
//!
//! [comm]
//! c_d = 1.0
//! c_agg = 1.0
//! alpha = 1.0
//! ```
//!
//! Every table except `[dataset]` may be omitted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterConfig;
use crate::comm::CommModelParams;
use crate::data::{DatasetSource, LABEL_MODULUS};
use crate::error::{Error, Result};
use crate::metrics::Seeds;
use crate::optim::OptimizerConfig;
use crate::orchestrator::{
    GlobalWeighting, MixWeights, PersonalizationPolicy, Protocol, SelectionRule,
};
use crate::statevec::MAX_QUBITS;

/// Environment variable that overrides `output_dir`.
pub const OUT_DIR_ENV: &str = "MDQFL_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeedConfig {
    /// Synthetic data generation.
    pub data: u64,
    /// Train/validation split.
    pub split: u64,
    /// Base seed of the per-device 80/20 splits; device `i` uses `device + i`.
    pub device: u64,
}

impl Default for SeedConfig {
    fn default() -> Self {
        SeedConfig {
            data: 0,
            split: 1,
            device: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: DatasetSource,
    pub n_train: usize,
    pub n_test: usize,
    #[serde(default = "default_pca")]
    pub pca_components: usize,
    /// Fraction of the training rows kept for the devices; the rest become
    /// the server validation set.
    #[serde(default = "default_validation_split")]
    pub validation_split: f64,
}

fn default_pca() -> usize {
    4
}
fn default_validation_split() -> f64 {
    0.8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub ansatz_reps: usize,
    /// Defaults to the source's class count, or 10 for CSV sources.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_classes: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            ansatz_reps: 3,
            n_classes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PolicyConfig {
    pub modes: PersonalizationPolicy,
    pub weights: MixWeights,
    pub global_weighting: GlobalWeighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub protocol: Protocol,
    pub n_devices: usize,
    pub rounds: usize,
    pub n_class: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_initial_param")]
    pub initial_param: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub write_device_traces: bool,
    #[serde(default)]
    pub seeds: SeedConfig,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub clustering: ClusterConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub selection: SelectionRule,
    #[serde(default)]
    pub comm: CommModelParams,
}

fn default_workers() -> usize {
    1
}
fn default_initial_param() -> f64 {
    0.5
}

impl ExperimentConfig {
    /// Parses and validates. Errors name the offending field.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| Error::config("<document>", e.to_string()))?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." {
                "<document>".to_string()
            } else {
                path
            };
            Error::config(field, e.into_inner().message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. Relative CSV paths are resolved against the
    /// file's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Load {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let DatasetSource::Csv { path, test_path } = &mut cfg.dataset.source {
            for p in std::iter::once(path).chain(test_path.as_mut()) {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self)
            .map_err(|e| Error::contract(format!("config serialization failed: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_devices == 0 {
            return Err(Error::config("n_devices", "must be at least 1"));
        }
        if self.rounds == 0 {
            return Err(Error::config("rounds", "must be at least 1"));
        }
        if !(1..=LABEL_MODULUS).contains(&self.n_class) {
            return Err(Error::config(
                "n_class",
                format!("must be in 1..={LABEL_MODULUS}"),
            ));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if !self.initial_param.is_finite() {
            return Err(Error::config("initial_param", "must be finite"));
        }
        let ds = &self.dataset;
        ds.source.validate()?;
        if ds.n_train < 2 || ds.n_test == 0 {
            return Err(Error::config(
                "dataset.n_train",
                "need n_train >= 2 and n_test >= 1",
            ));
        }
        if !(1..=MAX_QUBITS).contains(&ds.pca_components) {
            return Err(Error::config(
                "dataset.pca_components",
                format!("must be in 1..={MAX_QUBITS} (it sets the qubit count)"),
            ));
        }
        if !(ds.validation_split > 0.0 && ds.validation_split < 1.0) {
            return Err(Error::config(
                "dataset.validation_split",
                "must lie in (0, 1)",
            ));
        }
        if self.model.ansatz_reps == 0 {
            return Err(Error::config("model.ansatz_reps", "must be at least 1"));
        }
        let outcomes = 1usize << ds.pca_components;
        let classes = self.model_classes();
        if classes == 0 || classes > outcomes {
            return Err(Error::config(
                "model.n_classes",
                format!("must be in 1..={outcomes} for {} qubits", ds.pca_components),
            ));
        }
        self.optimizer.validate()?;
        self.clustering.validate()?;
        self.policy.weights.validate()?;
        self.comm.validate()?;
        Ok(())
    }

    /// Number of classes the classifier distinguishes.
    pub fn model_classes(&self) -> usize {
        self.model
            .n_classes
            .or_else(|| self.dataset.source.n_classes())
            .unwrap_or(LABEL_MODULUS)
    }

    pub fn seeds(&self) -> Seeds {
        Seeds {
            data: self.seeds.data,
            split: self.seeds.split,
            device: self.seeds.device,
            clustering: self.clustering.seed,
            selection: self.selection.seed,
        }
    }

    /// `explicit`, else `$MDQFL_OUT_DIR`, else `output_dir`, else `out`.
    pub fn resolve_output_dir(&self, explicit: Option<&Path>) -> PathBuf {
        if let Some(p) = explicit {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(p);
        }
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}
