use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::color::ColorFeatureSpec;
use crate::error::{Error, Result};
use crate::features::Family;
use crate::imaging::DEFAULT_KSIZES;
use crate::selection::ForestConfig;
use crate::shape::ShapeConfig;
use crate::texture::TextureConfig;

/// Everything a run depends on. Stored as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Dataset manifest path.
    pub dataset: PathBuf,
    pub output_dir: PathBuf,
    pub ksizes: Vec<usize>,
    pub families: Vec<Family>,
    pub color: ColorFeatureSpec,
    pub shape: ShapeConfig,
    pub texture: TextureConfig,
    /// `forest.seed` is replaced by `seed` at run time.
    pub forest: ForestConfig,
    pub seed: u64,
    /// Worker threads; `None` uses every core. Never affects outputs.
    pub jobs: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::from("dataset.json"),
            output_dir: PathBuf::from("out"),
            ksizes: DEFAULT_KSIZES.to_vec(),
            families: Family::ALL.to_vec(),
            color: ColorFeatureSpec::default(),
            shape: ShapeConfig::default(),
            texture: TextureConfig::default(),
            forest: ForestConfig::default(),
            seed: 0,
            jobs: None,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        if self.ksizes.is_empty() {
            return Err(Error::Config("ksizes must not be empty".into()));
        }
        if self.ksizes.contains(&0) {
            return Err(Error::Config("ksize 0 is invalid".into()));
        }
        if self.families.is_empty() {
            return Err(Error::Config("at least one feature family must be enabled".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be >= 1".into()));
        }
        self.color.validate().map_err(cfg)?;
        self.texture.gabor.validate().map_err(cfg)?;
        self.texture.glcm.validate().map_err(cfg)?;
        if let Some(c) = &self.shape.corners {
            c.validate().map_err(cfg)?;
        }
        if let Some(b) = &self.shape.blobs {
            b.validate().map_err(cfg)?;
        }
        self.forest_config().validate().map_err(cfg)
    }

    pub fn enabled(&self, family: Family) -> bool {
        self.families.contains(&family)
    }

    pub fn forest_config(&self) -> ForestConfig {
        ForestConfig {
            seed: self.seed,
            ..self.forest.clone()
        }
    }

    /// SHA-256 over the canonical JSON of every output-affecting field.
    pub fn hash(&self) -> String {
        let canonical = PipelineConfig {
            jobs: None,
            output_dir: PathBuf::new(),
            ..self.clone()
        };
        let digest = Sha256::digest(serde_json::to_vec(&canonical).expect("config serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
