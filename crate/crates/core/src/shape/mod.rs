//! Per-region shape descriptors: corners, DoH blobs and Canny contours.
//!
//! Every detector sees only the pixels of its own region.

pub mod blobs;
pub mod corners;
pub mod edges;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use blobs::{doh_blobs, Blob, BlobParams};
pub use corners::{shi_tomasi_corners, structure_tensor_response, Corner, CornerParams, CornerScore, CornerSet};
pub use edges::{canny_contour_features, ContourStats, EdgeParams};

use crate::error::{Error, Result};
use crate::features::FeatureSlice;
use crate::imaging::{GrayRaster, RegionGrid};

pub const SHAPE_FEATURE_NAMES: [&str; 8] = [
    "corner_count",
    "corner_mean_response",
    "blob_count",
    "blob_mean_sigma",
    "canny_contour_count",
    "canny_max_contour_area",
    "canny_total_contour_perimeter",
    "canny_edge_pixel_fraction",
];

/// Detector parameters; `None` selects the per-ksize schedule.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapeConfig {
    pub corners: Option<CornerParams>,
    pub blobs: Option<BlobParams>,
    pub edges: EdgeParams,
}

impl ShapeConfig {
    pub fn corner_params(&self, ksize: usize) -> CornerParams {
        self.corners.clone().unwrap_or_else(|| CornerParams::for_ksize(ksize))
    }

    pub fn blob_params(&self, ksize: usize) -> BlobParams {
        self.blobs.clone().unwrap_or_else(|| BlobParams::for_ksize(ksize))
    }
}

/// The eight shape features of one region block, in [`SHAPE_FEATURE_NAMES`] order.
pub fn shape_feature_slice(block: &GrayRaster, ksize: usize, config: &ShapeConfig) -> Result<Vec<f64>> {
    let corners = shi_tomasi_corners(block, &config.corner_params(ksize))?;
    let blobs = doh_blobs(block, &config.blob_params(ksize))?;
    let contours = canny_contour_features(block, &config.edges);
    let blob_mean_sigma = if blobs.is_empty() {
        0.0
    } else {
        blobs.iter().map(|b| b.sigma).sum::<f64>() / blobs.len() as f64
    };
    Ok(vec![
        corners.len() as f64,
        corners.mean_response(),
        blobs.len() as f64,
        blob_mean_sigma,
        contours.contour_count as f64,
        contours.max_contour_area,
        contours.total_contour_perimeter,
        contours.edge_pixel_fraction,
    ])
}

pub fn extract_shape_features(gray: &GrayRaster, grid: &RegionGrid, config: &ShapeConfig) -> Result<FeatureSlice> {
    let (ew, eh) = grid.extent();
    if ew > gray.width() || eh > gray.height() {
        return Err(Error::DimensionMismatch(format!(
            "grid extent {ew}x{eh} exceeds image {}x{}",
            gray.width(),
            gray.height()
        )));
    }
    let k = grid.ksize;
    let rows = grid
        .regions
        .par_iter()
        .map(|&(x0, y0)| shape_feature_slice(&gray.crop(x0, y0, k, k), k, config))
        .collect::<Result<Vec<_>>>()?;
    FeatureSlice::new(SHAPE_FEATURE_NAMES.iter().map(|s| s.to_string()).collect(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::build_region_grid;

    #[test]
    fn blank_region_all_zero() {
        let g = GrayRaster::filled(25, 25, 1, 0.35);
        let v = shape_feature_slice(&g, 25, &ShapeConfig::default()).unwrap();
        assert_eq!(v, vec![0.0; 8]);
    }

    #[test]
    fn quadrant_has_one_corner() {
        let g = GrayRaster::from_fn(25, 25, |x, y| if x >= 12 && y >= 12 { 0.8 } else { 0.2 });
        let cfg = ShapeConfig {
            corners: Some(CornerParams {
                quality_level: 0.2,
                ..CornerParams::for_ksize(25)
            }),
            ..ShapeConfig::default()
        };
        let v = shape_feature_slice(&g, 25, &cfg).unwrap();
        assert_eq!(v[0], 1.0, "{v:?}");
    }

    #[test]
    fn straight_step_has_no_corner_or_blob() {
        let g = GrayRaster::from_fn(25, 25, |x, _| if x >= 12 { 0.8 } else { 0.2 });
        let v = shape_feature_slice(&g, 25, &ShapeConfig::default()).unwrap();
        assert_eq!(v[0], 0.0, "{v:?}");
        assert_eq!(v[2], 0.0, "{v:?}");
        assert!(v[7] > 0.0, "{v:?}");
    }

    #[test]
    fn fixed_schema_across_regions() {
        let g = GrayRaster::from_fn(30, 20, |x, y| ((x * 7 + y * 13) % 17) as f32 / 17.0);
        let grid = build_region_grid(30, 20, 10).unwrap();
        let f = extract_shape_features(&g, &grid, &ShapeConfig::default()).unwrap();
        assert_eq!(f.n_rows(), 6);
        assert!(f.rows().iter().all(|r| r.len() == 8 && r.iter().all(|v| v.is_finite() && *v >= 0.0)));
    }
}
