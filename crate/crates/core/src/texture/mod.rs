//! Texture descriptors: Gabor bank, GLCM properties and rotation-invariant uniform LBP.

pub mod gabor;
pub mod glcm;
pub mod lbp;

use serde::{Deserialize, Serialize};

pub use gabor::{gabor_features, gabor_kernel, gabor_responses, GaborParams, Kernel};
pub use glcm::{glcm, glcm_features, glcm_properties, quantize, GlcmMatrix, GlcmProperties, GlcmSpec};
pub use lbp::{extract_lbp_features, lbp_features, lbp_histogram, rlbp_ulbp_code, LbpCode};

use crate::error::Result;
use crate::features::FeatureSlice;
use crate::imaging::{GrayRaster, ImageRaster, RegionGrid, RgbRaster};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextureConfig {
    pub gabor: GaborParams,
    pub glcm: GlcmSpec,
}

impl TextureConfig {
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = self.gabor.feature_names();
        names.extend(self.glcm.feature_names());
        names.extend(lbp::lbp_feature_names());
        names
    }
}

/// Per-image state shared across window sizes: the 8-bit gray image and the
/// full-image Gabor responses.
pub struct TextureExtractor<'a> {
    config: &'a TextureConfig,
    gray_u8: ImageRaster<u8>,
    responses: Vec<GrayRaster>,
}

impl<'a> TextureExtractor<'a> {
    pub fn new(image: &RgbRaster, config: &'a TextureConfig) -> Result<Self> {
        config.glcm.validate()?;
        Ok(Self {
            config,
            gray_u8: image.to_gray_u8(),
            responses: gabor_responses(&image.to_gray_f32(), &config.gabor)?,
        })
    }

    /// Gabor, GLCM and LBP columns for every region, in that order.
    pub fn extract(&self, grid: &RegionGrid) -> Result<FeatureSlice> {
        let (gabor, (glcm, lbp)) = rayon::join(
            || gabor::gabor_region_features(&self.responses, &self.config.gabor, grid),
            || {
                (
                    glcm_features(&self.gray_u8, grid, &self.config.glcm),
                    extract_lbp_features(&self.gray_u8, grid),
                )
            },
        );
        gabor?.hconcat(glcm?)?.hconcat(lbp?)
    }
}

pub fn extract_texture_features(image: &RgbRaster, grid: &RegionGrid, config: &TextureConfig) -> Result<FeatureSlice> {
    TextureExtractor::new(image, config)?.extract(grid)
}
