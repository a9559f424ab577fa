//! Synthetic boards: rectangular components on a flat substrate, with exact masks.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{DatasetEntry, DatasetManifest};
use crate::error::{Error, Result};
use crate::imaging::{save_image, save_mask, ImageRaster, RgbRaster, SemanticMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentTexture {
    Flat,
    /// Vertical stripes alternating the body colour with a darker shade.
    Striped { period: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticBoardSpec {
    pub width: usize,
    pub height: usize,
    pub substrate: [u8; 3],
    pub components: usize,
    /// Inclusive range of rectangle side lengths.
    pub min_size: usize,
    pub max_size: usize,
    pub palette: Vec<[u8; 3]>,
    pub texture: ComponentTexture,
    /// Amplitude of uniform per-channel noise; 0 disables it.
    pub noise: u8,
    /// Minimum gap between components, pixels.
    pub margin: usize,
    pub seed: u64,
    /// Placement attempts per component before giving up.
    pub max_attempts: usize,
}

impl Default for SyntheticBoardSpec {
    fn default() -> Self {
        Self {
            width: 200,
            height: 200,
            substrate: [30, 110, 50],
            components: 8,
            min_size: 15,
            max_size: 50,
            palette: vec![[25, 25, 28], [205, 185, 140], [190, 190, 200], [150, 90, 40], [40, 60, 160]],
            texture: ComponentTexture::Flat,
            noise: 0,
            margin: 2,
            seed: 0,
            max_attempts: 1000,
        }
    }
}

impl SyntheticBoardSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParams("board must be non-empty".into()));
        }
        if self.min_size == 0 || self.min_size > self.max_size {
            return Err(Error::InvalidParams(format!(
                "size range [{}, {}] invalid",
                self.min_size, self.max_size
            )));
        }
        if self.components > 0 && self.palette.is_empty() {
            return Err(Error::InvalidParams("palette must not be empty".into()));
        }
        if matches!(self.texture, ComponentTexture::Striped { period: 0 }) {
            return Err(Error::InvalidParams("stripe period must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rect {
    x: usize,
    y: usize,
    w: usize,
    h: usize,
}

impl Rect {
    fn separated(&self, o: &Rect, gap: usize) -> bool {
        self.x + self.w + gap <= o.x
            || o.x + o.w + gap <= self.x
            || self.y + self.h + gap <= o.y
            || o.y + o.h + gap <= self.y
    }
}

/// Deterministic in `spec` (including its seed).
pub fn synth_board(spec: &SyntheticBoardSpec) -> Result<(RgbRaster, SemanticMask)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (spec.width, spec.height);
    let mut placed: Vec<(Rect, [u8; 3])> = Vec::with_capacity(spec.components);
    for index in 0..spec.components {
        let mut attempts = 0;
        let rect = loop {
            if attempts == spec.max_attempts {
                return Err(Error::PlacementFailure { index, attempts });
            }
            attempts += 1;
            let rw = rng.random_range(spec.min_size..=spec.max_size);
            let rh = rng.random_range(spec.min_size..=spec.max_size);
            if rw > w || rh > h {
                continue;
            }
            let r = Rect {
                x: rng.random_range(0..=w - rw),
                y: rng.random_range(0..=h - rh),
                w: rw,
                h: rh,
            };
            if placed.iter().all(|(p, _)| p.separated(&r, spec.margin)) {
                break r;
            }
        };
        let color = spec.palette[rng.random_range(0..spec.palette.len())];
        placed.push((rect, color));
    }

    let mut image = ImageRaster::filled(w, h, 3, 0u8);
    let mut mask = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            image.data_mut()[(y * w + x) * 3..][..3].copy_from_slice(&spec.substrate);
        }
    }
    for (r, color) in &placed {
        for y in r.y..r.y + r.h {
            for x in r.x..r.x + r.w {
                let px = match spec.texture {
                    ComponentTexture::Striped { period } if ((x - r.x) / period) % 2 == 1 => color.map(|c| c / 2),
                    _ => *color,
                };
                image.data_mut()[(y * w + x) * 3..][..3].copy_from_slice(&px);
                mask[y * w + x] = 1;
            }
        }
    }
    if spec.noise > 0 {
        let a = spec.noise as i16;
        for v in image.data_mut() {
            *v = (*v as i16 + rng.random_range(-a..=a)).clamp(0, 255) as u8;
        }
    }
    Ok((image, SemanticMask::from_raw(w, h, &mask)?))
}

/// Writes `count` boards (`board_XX.png`, `board_XX_mask.png`) and a
/// `dataset.json` manifest into `dir`. Board `i` uses seed `spec.seed + i`.
pub fn synth_dataset(spec: &SyntheticBoardSpec, count: usize, dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = DatasetManifest::default();
    for i in 0..count {
        let board = SyntheticBoardSpec {
            seed: spec.seed.wrapping_add(i as u64),
            ..spec.clone()
        };
        let (image, mask) = synth_board(&board)?;
        let id = format!("board_{i:02}");
        let image_name = format!("{id}.png");
        let mask_name = format!("{id}_mask.png");
        save_image(&image, dir.join(&image_name))?;
        save_mask(&mask, dir.join(&mask_name))?;
        manifest.images.push(DatasetEntry {
            id,
            image_path: image_name.into(),
            mask_path: mask_name.into(),
        });
    }
    manifest.save(dir.join("dataset.json"))?;
    Ok(manifest)
}
