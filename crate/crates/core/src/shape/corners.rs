//! Structure-tensor corner scoring, Shi-Tomasi selection and iterative
//! sub-pixel refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{box_sum, sobel};
use crate::imaging::GrayRaster;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CornerScore {
    /// `min(l1, l2)` of the structure tensor.
    MinEigen,
    /// `det(M) - k trace(M)^2`.
    Harris,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerParams {
    pub max_corners: usize,
    pub quality_level: f64,
    pub min_distance: f64,
    pub block_size: usize,
    pub harris_k: f64,
    pub score: CornerScore,
    /// Half-width of the refinement window.
    pub refine_window: usize,
    /// Half-width of the dead zone in the middle of the refinement window.
    pub refine_zero_zone: Option<usize>,
    pub refine_max_iter: usize,
    pub refine_epsilon: f64,
}

impl CornerParams {
    /// Detection budget scaled to the region size.
    pub fn for_ksize(ksize: usize) -> Self {
        Self {
            max_corners: ksize,
            min_distance: (ksize / 5).max(1) as f64,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.quality_level > 0.0 && self.quality_level < 1.0) {
            return Err(Error::InvalidParams(format!("quality_level {} not in (0,1)", self.quality_level)));
        }
        if self.min_distance < 1.0 {
            return Err(Error::InvalidParams(format!("min_distance {} < 1", self.min_distance)));
        }
        if self.block_size < 3 || self.block_size.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("block_size {} must be odd and >= 3", self.block_size)));
        }
        Ok(())
    }
}

impl Default for CornerParams {
    fn default() -> Self {
        Self {
            max_corners: 25,
            quality_level: 0.01,
            min_distance: 5.0,
            block_size: 3,
            harris_k: 0.04,
            score: CornerScore::MinEigen,
            refine_window: 3,
            refine_zero_zone: None,
            refine_max_iter: 40,
            refine_epsilon: 0.001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub x: f64,
    pub y: f64,
    pub response: f64,
}

/// Corners sorted by descending response.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CornerSet {
    pub corners: Vec<Corner>,
}

impl CornerSet {
    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn mean_response(&self) -> f64 {
        if self.corners.is_empty() {
            0.0
        } else {
            self.corners.iter().map(|c| c.response).sum::<f64>() / self.corners.len() as f64
        }
    }
}

/// Per-pixel entries `(Σ Ix², Σ Ix·Iy, Σ Iy²)` of the windowed structure tensor.
#[derive(Debug, Clone)]
pub struct StructureTensor {
    pub width: usize,
    pub height: usize,
    pub xx: Vec<f64>,
    pub xy: Vec<f64>,
    pub yy: Vec<f64>,
}

pub fn structure_tensor(gray: &GrayRaster, block_size: usize) -> StructureTensor {
    let (w, h) = (gray.width(), gray.height());
    let (gx, gy) = sobel(gray);
    let xx: Vec<f64> = gx.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a * b).collect();
    let yy: Vec<f64> = gy.iter().map(|v| v * v).collect();
    StructureTensor {
        width: w,
        height: h,
        xx: box_sum(&xx, w, h, block_size),
        xy: box_sum(&xy, w, h, block_size),
        yy: box_sum(&yy, w, h, block_size),
    }
}

/// Smaller eigenvalue of `[[a, b], [b, c]]`.
#[inline]
pub fn min_eigenvalue(a: f64, b: f64, c: f64) -> f64 {
    let half_tr = 0.5 * (a + c);
    let half_diff = 0.5 * (a - c);
    half_tr - (half_diff * half_diff + b * b).sqrt()
}

#[inline]
pub fn harris_response(a: f64, b: f64, c: f64, k: f64) -> f64 {
    let tr = a + c;
    a * c - b * b - k * tr * tr
}

/// Corner response map, row-major.
pub fn structure_tensor_response(gray: &GrayRaster, block_size: usize, score: CornerScore, harris_k: f64) -> Vec<f64> {
    let t = structure_tensor(gray, block_size);
    (0..t.xx.len())
        .map(|i| match score {
            CornerScore::MinEigen => min_eigenvalue(t.xx[i], t.xy[i], t.yy[i]),
            CornerScore::Harris => harris_response(t.xx[i], t.xy[i], t.yy[i], harris_k),
        })
        .collect()
}

pub fn shi_tomasi_corners(gray: &GrayRaster, params: &CornerParams) -> Result<CornerSet> {
    params.validate()?;
    let (w, h) = (gray.width(), gray.height());
    if w < 3 || h < 3 {
        return Ok(CornerSet::default());
    }
    let response = structure_tensor_response(gray, params.block_size, params.score, params.harris_k);
    let max = response.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_nan() || max <= 0.0 {
        return Ok(CornerSet::default());
    }
    let threshold = params.quality_level * max;

    let mut candidates = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let v = response[y * w + x];
            if v <= threshold {
                continue;
            }
            let is_max = (y - 1..=y + 1).all(|ny| (x - 1..=x + 1).all(|nx| response[ny * w + nx] <= v));
            if is_max {
                candidates.push((x, y, v));
            }
        }
    }
    // stable: equal responses keep raster order
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2));

    let min_d2 = params.min_distance * params.min_distance;
    let mut kept: Vec<Corner> = Vec::new();
    for (x, y, v) in candidates {
        if params.max_corners > 0 && kept.len() >= params.max_corners {
            break;
        }
        let (fx, fy) = (x as f64, y as f64);
        if kept.iter().all(|c| (c.x - fx).powi(2) + (c.y - fy).powi(2) >= min_d2) {
            kept.push(Corner { x: fx, y: fy, response: v });
        }
    }

    let refined = kept
        .into_iter()
        .map(|c| {
            let (x, y) = refine_corner(
                gray,
                (c.x, c.y),
                params.refine_window,
                params.refine_zero_zone,
                params.refine_max_iter,
                params.refine_epsilon,
            );
            Corner { x, y, ..c }
        })
        .collect();
    Ok(CornerSet { corners: refined })
}

/// Bilinear sample with clamped borders.
fn sample(gray: &GrayRaster, x: f64, y: f64) -> f64 {
    let (w, h) = (gray.width() as isize, gray.height() as isize);
    let x0 = x.floor();
    let y0 = y.floor();
    let (ax, ay) = (x - x0, y - y0);
    let at = |xi: isize, yi: isize| {
        let xi = xi.clamp(0, w - 1) as usize;
        let yi = yi.clamp(0, h - 1) as usize;
        gray.get(xi, yi, 0) as f64
    };
    let (xi, yi) = (x0 as isize, y0 as isize);
    (1.0 - ay) * ((1.0 - ax) * at(xi, yi) + ax * at(xi + 1, yi)) + ay * ((1.0 - ax) * at(xi, yi + 1) + ax * at(xi + 1, yi + 1))
}

/// Moves `start` to the point where image gradients in the surrounding
/// window are orthogonal to the vectors pointing at it. Reverts to `start`
/// when the estimate drifts further than the window or leaves the image.
pub fn refine_corner(
    gray: &GrayRaster,
    start: (f64, f64),
    window: usize,
    zero_zone: Option<usize>,
    max_iter: usize,
    epsilon: f64,
) -> (f64, f64) {
    if window == 0 {
        return start;
    }
    let win = window as isize;
    let side = 2 * window + 1;
    let coeff = 1.0 / (window * window) as f64;
    let mask1d: Vec<f64> = (-win..=win).map(|i| (-((i * i) as f64) * coeff).exp()).collect();
    let mut mask = vec![0f64; side * side];
    for (i, my) in mask1d.iter().enumerate() {
        for (j, mx) in mask1d.iter().enumerate() {
            mask[i * side + j] = my * mx;
        }
    }
    if let Some(z) = zero_zone {
        let z = z as isize;
        for dy in -z..=z {
            for dx in -z..=z {
                if dy.abs() <= win && dx.abs() <= win {
                    mask[((dy + win) as usize) * side + (dx + win) as usize] = 0.0;
                }
            }
        }
    }

    let (w, h) = (gray.width() as f64, gray.height() as f64);
    let (mut cx, mut cy) = start;
    let eps2 = epsilon * epsilon;
    let mut sub = vec![0f64; (side + 2) * (side + 2)];
    for _ in 0..max_iter.max(1) {
        let stride = side + 2;
        for i in 0..stride {
            for j in 0..stride {
                sub[i * stride + j] = sample(gray, cx + j as f64 - (win + 1) as f64, cy + i as f64 - (win + 1) as f64);
            }
        }
        let (mut a, mut b, mut c, mut bb1, mut bb2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..side {
            let py = i as f64 - win as f64;
            for j in 0..side {
                let m = mask[i * side + j];
                let tgx = sub[(i + 1) * stride + j + 2] - sub[(i + 1) * stride + j];
                let tgy = sub[(i + 2) * stride + j + 1] - sub[i * stride + j + 1];
                let gxx = tgx * tgx * m;
                let gxy = tgx * tgy * m;
                let gyy = tgy * tgy * m;
                let px = j as f64 - win as f64;
                a += gxx;
                b += gxy;
                c += gyy;
                bb1 += gxx * px + gxy * py;
                bb2 += gxy * px + gyy * py;
            }
        }
        let det = a * c - b * b;
        if det.abs() <= f64::EPSILON * f64::EPSILON {
            break;
        }
        let nx = cx + (c * bb1 - b * bb2) / det;
        let ny = cy + (a * bb2 - b * bb1) / det;
        let err = (nx - cx).powi(2) + (ny - cy).powi(2);
        cx = nx;
        cy = ny;
        if cx < 0.0 || cx >= w || cy < 0.0 || cy >= h || err <= eps2 {
            break;
        }
    }
    let inside = cx >= 0.0 && cx <= w - 1.0 && cy >= 0.0 && cy <= h - 1.0;
    if !inside || (cx - start.0).abs() > window as f64 || (cy - start.1).abs() > window as f64 {
        start
    } else {
        (cx, cy)
    }
}
