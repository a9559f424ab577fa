//! Gray-level co-occurrence matrices and their Haralick-style properties.

use log::warn;
use serde::{Deserialize, Serialize};

use super::gabor::fmt_angle;
use crate::error::{Error, Result};
use crate::features::FeatureSlice;
use crate::imaging::{ImageRaster, RegionGrid};
use crate::stats::entropy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlcmSpec {
    pub distances: Vec<usize>,
    /// Degrees; 0 points right, 90 points up.
    pub angles: Vec<f64>,
    pub levels: usize,
    pub symmetric: bool,
    pub normalize: bool,
}

impl Default for GlcmSpec {
    fn default() -> Self {
        Self {
            distances: vec![1],
            angles: vec![0.0, 45.0, 90.0, 135.0],
            levels: 16,
            symmetric: true,
            normalize: true,
        }
    }
}

pub const GLCM_PROPERTIES: [&str; 6] = ["asm", "contrast", "dissimilarity", "energy", "entropy", "homogeneity"];

impl GlcmSpec {
    pub fn validate(&self) -> Result<()> {
        if self.levels < 2 || self.levels > 256 {
            return Err(Error::InvalidParams(format!("glcm levels {} not in [2, 256]", self.levels)));
        }
        if self.distances.is_empty() || self.angles.is_empty() || self.distances.contains(&0) {
            return Err(Error::InvalidParams("glcm needs positive distances and >= 1 angle".into()));
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<String> {
        let with_distance = self.distances.len() > 1;
        let mut names = Vec::new();
        for &d in &self.distances {
            for &a in &self.angles {
                for prop in GLCM_PROPERTIES {
                    let a = fmt_angle(a);
                    names.push(if with_distance {
                        format!("glcm_d{d}_a{a}_{prop}")
                    } else {
                        format!("glcm_a{a}_{prop}")
                    });
                }
            }
        }
        names
    }
}

/// Pixel offset `(dx, dy)` for a step of `distance` at `angle_deg`, with y downward.
pub fn offset(distance: usize, angle_deg: f64) -> (isize, isize) {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let d = distance as f64;
    ((d * c).round() as isize, -(d * s).round() as isize)
}

/// Equal-width binning of `[0, 255]` into `levels` bins.
#[inline]
pub fn quantize(value: u8, levels: usize) -> u8 {
    (value as usize * levels / 256) as u8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlcmMatrix {
    pub levels: usize,
    pub distance: usize,
    pub angle: f64,
    /// Row index = reference level, column = neighbour level.
    pub data: Vec<f64>,
}

impl GlcmMatrix {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.levels + j]
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// Co-occurrence counts of an already-quantized single-channel block.
pub fn glcm(
    block: &ImageRaster<u8>,
    levels: usize,
    distance: usize,
    angle_deg: f64,
    symmetric: bool,
    normalize: bool,
) -> Result<GlcmMatrix> {
    let (w, h) = (block.width() as isize, block.height() as isize);
    let (dx, dy) = offset(distance, angle_deg);
    let mut data = vec![0f64; levels * levels];
    let src = block.data();
    let ys = 0.max(-dy)..h.min(h - dy);
    let xs = 0.max(-dx)..w.min(w - dx);
    let mut pairs = 0usize;
    for y in ys {
        let row = &src[(y * w) as usize..((y + 1) * w) as usize];
        let nrow = &src[((y + dy) * w) as usize..((y + dy + 1) * w) as usize];
        for x in xs.clone() {
            let i = row[x as usize] as usize;
            let j = nrow[(x + dx) as usize] as usize;
            if i >= levels || j >= levels {
                return Err(Error::InvalidParams(format!("gray level {} outside {levels} levels", i.max(j))));
            }
            data[i * levels + j] += 1.0;
            pairs += 1;
        }
    }
    if pairs == 0 {
        return Err(Error::DegenerateRegion(format!(
            "{}x{} block has no pixel pairs at offset ({dx},{dy})",
            w, h
        )));
    }
    if symmetric {
        for i in 0..levels {
            for j in i + 1..levels {
                let s = data[i * levels + j] + data[j * levels + i];
                data[i * levels + j] = s;
                data[j * levels + i] = s;
            }
            data[i * levels + i] *= 2.0;
        }
    }
    if normalize {
        let total: f64 = data.iter().sum();
        data.iter_mut().for_each(|v| *v /= total);
    }
    Ok(GlcmMatrix {
        levels,
        distance,
        angle: angle_deg,
        data,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlcmProperties {
    pub asm: f64,
    pub contrast: f64,
    pub dissimilarity: f64,
    pub energy: f64,
    pub entropy: f64,
    pub homogeneity: f64,
}

impl GlcmProperties {
    /// Values in [`GLCM_PROPERTIES`] order.
    pub fn to_array(self) -> [f64; 6] {
        [self.asm, self.contrast, self.dissimilarity, self.energy, self.entropy, self.homogeneity]
    }
}

pub fn glcm_properties(m: &GlcmMatrix) -> GlcmProperties {
    let n = m.levels;
    let (mut asm, mut contrast, mut dissimilarity, mut homogeneity) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let p = m.at(i, j);
            let d = i as f64 - j as f64;
            asm += p * p;
            contrast += p * d * d;
            dissimilarity += p * d.abs();
            homogeneity += p / (1.0 + d * d);
        }
    }
    GlcmProperties {
        asm,
        contrast,
        dissimilarity,
        energy: asm.sqrt(),
        entropy: entropy(&m.data),
        homogeneity,
    }
}

/// Six properties per (distance, angle) for every region. Regions with no
/// valid pixel pair for an offset get zeros and a warning.
pub fn glcm_features(gray: &ImageRaster<u8>, grid: &RegionGrid, spec: &GlcmSpec) -> Result<FeatureSlice> {
    spec.validate()?;
    let quantized = gray.map(|v| quantize(v, spec.levels));
    let k = grid.ksize;
    let rows = grid
        .regions
        .iter()
        .map(|&(x0, y0)| {
            let block = quantized.crop(x0, y0, k, k);
            let mut row = Vec::with_capacity(spec.distances.len() * spec.angles.len() * 6);
            for &d in &spec.distances {
                for &a in &spec.angles {
                    match glcm(&block, spec.levels, d, a, spec.symmetric, spec.normalize) {
                        Ok(m) => row.extend(glcm_properties(&m).to_array()),
                        Err(Error::DegenerateRegion(msg)) => {
                            warn!("region at ({x0},{y0}): {msg}; GLCM features set to 0");
                            row.extend([0.0; 6]);
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureSlice::new(spec.feature_names(), rows)
}
