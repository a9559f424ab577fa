use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::dataset::{DatasetEntry, DatasetManifest};
use super::{write_file, write_json, RunSummary};
use crate::color::extract_color_features;
use crate::error::{Error, Result};
use crate::features::{Family, FeatureSlice};
use crate::imaging::{build_region_grid, label_regions, load_image, load_mask, RgbRaster, SemanticMask};
use crate::selection::FeatureMatrix;
use crate::shape::extract_shape_features;
use crate::texture::TextureExtractor;

pub const FEATURES_DIR: &str = "features";
pub const RUN_MANIFEST: &str = "run_manifest.json";

pub fn feature_csv_path(output_dir: &Path, image_id: &str, ksize: usize) -> PathBuf {
    output_dir.join(FEATURES_DIR).join(format!("{image_id}_{ksize}.csv"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageOutcome {
    pub id: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Written next to the outputs. Holds nothing schedule-dependent, so it is
/// byte-identical across worker counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: PipelineConfig,
    pub images: Vec<ImageOutcome>,
}

impl RunManifest {
    pub(crate) fn new(config: &PipelineConfig, images: Vec<ImageOutcome>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
            seed: config.seed,
            config: PipelineConfig {
                jobs: None,
                ..config.clone()
            },
            images,
        }
    }
}

fn timed<T>(image: &str, ksize: usize, family: Family, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    info!(
        "{image} k={ksize} {family}: {:.1} ms",
        start.elapsed().as_secs_f64() * 1e3
    );
    out
}

/// Feature matrices of one in-memory image, one per configured ksize, with
/// columns ordered color, shape, texture.
pub fn extract_feature_matrices(
    image: &RgbRaster,
    mask: &SemanticMask,
    id: &str,
    config: &PipelineConfig,
) -> Result<Vec<FeatureMatrix>> {
    mask.check_pairs_with(image)?;
    let gray = config.enabled(Family::Shape).then(|| image.to_gray_f32());
    let texture = if config.enabled(Family::Texture) {
        let start = Instant::now();
        let t = TextureExtractor::new(image, &config.texture)?;
        info!("{id} gabor bank: {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
        Some(t)
    } else {
        None
    };
    config
        .ksizes
        .iter()
        .map(|&k| {
            let grid = build_region_grid(image.width(), image.height(), k)?;
            let labels = label_regions(&grid, mask)?.into_iter().map(|l| l.decile).collect();
            let mut slice = FeatureSlice::default();
            if config.enabled(Family::Color) {
                slice = slice.hconcat(timed(id, k, Family::Color, || {
                    extract_color_features(image, &grid, &config.color)
                })?)?;
            }
            if let Some(gray) = &gray {
                slice = slice.hconcat(timed(id, k, Family::Shape, || {
                    extract_shape_features(gray, &grid, &config.shape)
                })?)?;
            }
            if let Some(t) = &texture {
                slice = slice.hconcat(timed(id, k, Family::Texture, || t.extract(&grid))?)?;
            }
            FeatureMatrix::from_slice(slice, labels, id, k)
        })
        .collect()
}

fn extract_image(entry: &DatasetEntry, config: &PipelineConfig) -> Result<()> {
    let image = load_image(&entry.image_path)?;
    let mask = load_mask(&entry.mask_path)?;
    for matrix in extract_feature_matrices(&image, &mask, &entry.id, config)? {
        let mut buf = Vec::new();
        matrix.write_csv(&mut buf)?;
        write_file(&feature_csv_path(&config.output_dir, &entry.id, matrix.ksize), &buf)?;
    }
    Ok(())
}

/// Writes one CSV per (image, ksize) plus the run manifest. A failing image
/// is logged and skipped; configuration problems abort the run.
pub fn run_extract(config: &PipelineConfig) -> Result<RunSummary> {
    config.validate()?;
    let dataset = DatasetManifest::load(&config.dataset)?;
    let dir = config.output_dir.join(FEATURES_DIR);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let outcomes: Vec<ImageOutcome> = dataset
        .images
        .par_iter()
        .map(|entry| match extract_image(entry, config) {
            Ok(()) => ImageOutcome {
                id: entry.id.clone(),
                ok: true,
                error: None,
            },
            Err(e) => {
                warn!("{}: skipped: {e}", entry.id);
                ImageOutcome {
                    id: entry.id.clone(),
                    ok: false,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect();

    let summary = RunSummary::from_outcomes(&outcomes);
    write_json(&config.output_dir.join(RUN_MANIFEST), &RunManifest::new(config, outcomes))?;
    Ok(summary)
}
