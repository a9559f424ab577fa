use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub id: String,
    pub image_path: PathBuf,
    pub mask_path: PathBuf,
}

/// `{"images": [{"id", "image_path", "mask_path"}]}`; relative paths are
/// resolved against the manifest's directory on load.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub images: Vec<DatasetEntry>,
}

impl DatasetManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut m: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for e in &mut m.images {
            e.image_path = base.join(&e.image_path);
            e.mask_path = base.join(&e.mask_path);
        }
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.images.is_empty() {
            return Err(Error::Config("no images".into()));
        }
        let mut seen = HashSet::new();
        for e in &self.images {
            let valid = !e.id.is_empty() && e.id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
            if !valid {
                return Err(Error::Config(format!("image id `{}` must be non-empty [A-Za-z0-9._-]", e.id)));
            }
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Config(format!("duplicate image id `{}`", e.id)));
            }
        }
        Ok(())
    }
}
