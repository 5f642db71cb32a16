use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::Connectivity;
use crate::error::{Error, Result};
use crate::nn::{Pooling, Variant};

/// Arithmetic precision of training. Only 64-bit is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F64,
}

/// Everything that determines a cross-validation run. Where the data lives is
/// deliberately not part of it, so moving a dataset does not change the hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub variant: Variant,
    pub pooling: Pooling,
    /// Augmentation multiplier: 1 is canonical only, `k` adds `k - 1`
    /// shuffled tree and projection copies of every training graph.
    pub aug: usize,
    /// Draw fresh augmented copies every epoch instead of a fixed pool.
    pub aug_online: bool,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub folds: usize,
    pub connectivity: Connectivity,
    pub precision: Precision,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: "MUTAG".into(),
            variant: Variant::TreeRnn,
            pooling: Pooling::FinalRow,
            aug: 1,
            aug_online: false,
            epochs: 50,
            batch_size: 32,
            lr: 1e-4,
            seed: 0,
            folds: 10,
            connectivity: Connectivity::Strict,
            precision: Precision::F64,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.aug < 1 {
            return fail("aug must be at least 1".into());
        }
        if self.folds < 2 {
            return fail(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.batch_size < 1 {
            return fail("batch size must be at least 1".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.lr));
        }
        if self.dataset.is_empty() {
            return fail("dataset name is empty".into());
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
