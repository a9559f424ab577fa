//! Batch orchestration: extraction to CSV, forest ranking, reports and synthetic data.

pub mod config;
pub mod dataset;
pub mod extract;
pub mod rank;
pub mod synth;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

pub use config::PipelineConfig;
pub use dataset::{DatasetEntry, DatasetManifest};
pub use extract::{extract_feature_matrices, feature_csv_path, run_extract, ImageOutcome, RunManifest};
pub use rank::{render_report, run_rank, FamilySummary, TopFeatures};
pub use synth::{synth_board, synth_dataset, ComponentTexture, SyntheticBoardSpec};

use crate::error::{Error, Result};

/// Per-image outcome counts of a stage.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunSummary {
    pub succeeded: usize,
    pub failed: Vec<(String, String)>,
}

impl RunSummary {
    pub(crate) fn from_outcomes(outcomes: &[ImageOutcome]) -> Self {
        let mut s = RunSummary::default();
        for o in outcomes {
            if o.ok {
                s.succeeded += 1;
            } else {
                s.failed.push((o.id.clone(), o.error.clone().unwrap_or_default()));
            }
        }
        s
    }

    /// 0 when every image succeeded, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failed.is_empty() {
            0
        } else {
            1
        }
    }
}

/// Runs `f` on a dedicated pool of `jobs` threads (all cores for `None`).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub(crate) fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}
