//! Real Gabor filter bank, applied to the whole image and aggregated per region.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSlice;
use crate::filter::correlate2d;
use crate::imaging::{GrayRaster, RegionGrid};
use crate::stats::{mean_f64, variance_f64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaborParams {
    /// Wavelength of the carrier, pixels.
    pub lambda: f64,
    /// Orientations, degrees.
    pub thetas: Vec<f64>,
    /// Carrier phase, degrees.
    pub psi: f64,
    /// Envelope standard deviation, pixels.
    pub sigma: f64,
    /// Envelope aspect ratio.
    pub gamma: f64,
    /// Odd kernel side; `None` means `2 * ceil(3 sigma) + 1`.
    pub kernel_extent: Option<usize>,
}

impl Default for GaborParams {
    fn default() -> Self {
        Self {
            lambda: 14.0,
            thetas: vec![0.0, 30.0, 60.0, 90.0, 120.0, 150.0],
            psi: 0.0,
            sigma: 5.0,
            gamma: 1.0,
            kernel_extent: None,
        }
    }
}

impl GaborParams {
    pub fn extent(&self) -> usize {
        self.kernel_extent
            .unwrap_or_else(|| 2 * (3.0 * self.sigma).ceil() as usize + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.extent().is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("gabor kernel extent {} is even", self.extent())));
        }
        if !(self.lambda > 0.0 && self.sigma > 0.0 && self.gamma > 0.0) || self.thetas.is_empty() {
            return Err(Error::InvalidParams("gabor lambda, sigma, gamma must be positive with >= 1 theta".into()));
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.thetas
            .iter()
            .flat_map(|&t| {
                let t = fmt_angle(t);
                [format!("gabor_t{t}_mean"), format!("gabor_t{t}_var")]
            })
            .collect()
    }
}

pub(crate) fn fmt_angle(deg: f64) -> String {
    if deg.fract() == 0.0 {
        format!("{}", deg as i64)
    } else {
        format!("{deg}")
    }
}

/// Square row-major kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub size: usize,
    pub data: Vec<f32>,
}

impl Kernel {
    pub fn at(&self, col: usize, row: usize) -> f32 {
        self.data[row * self.size + col]
    }
}

/// `exp(-(x'^2 + gamma^2 y'^2) / 2 sigma^2) * cos(2 pi x' / lambda + psi)` with
/// `x' = x cos(theta) + y sin(theta)`, `y' = -x sin(theta) + y cos(theta)`,
/// `x` to the right and `y` downward from the kernel centre.
pub fn gabor_kernel(params: &GaborParams, theta_deg: f64) -> Kernel {
    let size = params.extent();
    let half = (size / 2) as f64;
    let (s, c) = theta_deg.to_radians().sin_cos();
    let psi = params.psi.to_radians();
    let two_s2 = 2.0 * params.sigma * params.sigma;
    let g2 = params.gamma * params.gamma;
    let mut data = Vec::with_capacity(size * size);
    for row in 0..size {
        let y = row as f64 - half;
        for col in 0..size {
            let x = col as f64 - half;
            let xr = x * c + y * s;
            let yr = -x * s + y * c;
            let env = (-(xr * xr + g2 * yr * yr) / two_s2).exp();
            data.push((env * (2.0 * std::f64::consts::PI * xr / params.lambda + psi).cos()) as f32);
        }
    }
    Kernel { size, data }
}

/// Filtered images, one per orientation.
pub fn gabor_responses(gray: &GrayRaster, params: &GaborParams) -> Result<Vec<GrayRaster>> {
    params.validate()?;
    Ok(params
        .thetas
        .par_iter()
        .map(|&t| {
            let k = gabor_kernel(params, t);
            correlate2d(gray, &k.data, k.size, k.size)
        })
        .collect())
}

/// Mean and variance of the response magnitude over each region, per orientation.
pub fn gabor_features(gray: &GrayRaster, params: &GaborParams, grid: &RegionGrid) -> Result<FeatureSlice> {
    let responses = gabor_responses(gray, params)?;
    gabor_region_features(&responses, params, grid)
}

/// Per-region aggregation of responses from [`gabor_responses`].
pub fn gabor_region_features(responses: &[GrayRaster], params: &GaborParams, grid: &RegionGrid) -> Result<FeatureSlice> {
    let (ew, eh) = grid.extent();
    if let Some(r) = responses.iter().find(|r| ew > r.width() || eh > r.height()) {
        return Err(Error::DimensionMismatch(format!(
            "grid extent {ew}x{eh} exceeds image {}x{}",
            r.width(),
            r.height()
        )));
    }
    let k = grid.ksize;
    let rows = grid
        .regions
        .iter()
        .map(|&(x0, y0)| {
            let mut row = Vec::with_capacity(2 * responses.len());
            let mut buf = Vec::with_capacity(k * k);
            for r in responses {
                buf.clear();
                for y in y0..y0 + k {
                    for x in x0..x0 + k {
                        buf.push((r.get(x, y, 0) as f64).abs());
                    }
                }
                row.push(mean_f64(&buf));
                row.push(variance_f64(&buf));
            }
            row
        })
        .collect();
    FeatureSlice::new(params.feature_names(), rows)
}
