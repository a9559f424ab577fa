//! Determinant-of-Hessian blob detection over a discrete scale space.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{gaussian_kernels, separable};
use crate::imaging::GrayRaster;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobParams {
    pub min_sigma: f64,
    pub max_sigma: f64,
    pub num_sigma: usize,
    /// Lower bound on scale-normalized DoH maxima.
    pub threshold: f64,
    /// Blobs overlapping by more than this fraction are pruned.
    pub overlap: f64,
    pub log_scale: bool,
}

impl Default for BlobParams {
    fn default() -> Self {
        Self {
            min_sigma: 1.0,
            max_sigma: 30.0,
            num_sigma: 10,
            threshold: 0.01,
            overlap: 0.5,
            log_scale: false,
        }
    }
}

impl BlobParams {
    pub fn for_ksize(ksize: usize) -> Self {
        Self {
            min_sigma: 1.0,
            max_sigma: (ksize as f64 / 2.0).max(1.0),
            num_sigma: 5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_sigma > 0.0 && self.min_sigma <= self.max_sigma) {
            return Err(Error::InvalidParams(format!(
                "sigma range [{}, {}] invalid",
                self.min_sigma, self.max_sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::InvalidParams(format!("overlap {} not in [0,1]", self.overlap)));
        }
        if self.num_sigma == 0 {
            return Err(Error::InvalidParams("num_sigma must be >= 1".into()));
        }
        Ok(())
    }

    pub fn sigmas(&self) -> Vec<f64> {
        let n = self.num_sigma;
        if n == 1 {
            return vec![self.min_sigma];
        }
        let (lo, hi) = if self.log_scale {
            (self.min_sigma.log10(), self.max_sigma.log10())
        } else {
            (self.min_sigma, self.max_sigma)
        };
        (0..n)
            .map(|i| {
                let v = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                if self.log_scale {
                    10f64.powf(v)
                } else {
                    v
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
}

/// `sigma^4 (Lxx Lyy - Lxy^2)` at one scale, row-major.
pub fn hessian_determinant(gray: &GrayRaster, sigma: f64) -> Vec<f64> {
    let [g, d1, d2] = gaussian_kernels(sigma);
    let lxx = separable(gray, &d2, &g);
    let lyy = separable(gray, &g, &d2);
    let lxy = separable(gray, &d1, &d1);
    let s4 = sigma.powi(4);
    lxx.iter()
        .zip(&lyy)
        .zip(&lxy)
        .map(|((xx, yy), xy)| s4 * (xx * yy - xy * xy))
        .collect()
}

pub fn doh_blobs(gray: &GrayRaster, params: &BlobParams) -> Result<Vec<Blob>> {
    params.validate()?;
    let (w, h) = (gray.width(), gray.height());
    if w == 0 || h == 0 {
        return Ok(Vec::new());
    }
    let sigmas = params.sigmas();
    let cube: Vec<Vec<f64>> = sigmas.iter().map(|&s| hessian_determinant(gray, s)).collect();
    let ns = sigmas.len();

    let mut candidates: Vec<(Blob, f64)> = Vec::new();
    for s in 0..ns {
        for y in 0..h {
            for x in 0..w {
                let v = cube[s][y * w + x];
                if v <= params.threshold {
                    continue;
                }
                let mut is_max = true;
                'scan: for layer in &cube[s.saturating_sub(1)..=(s + 1).min(ns - 1)] {
                    for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                        for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                            if layer[ny * w + nx] > v {
                                is_max = false;
                                break 'scan;
                            }
                        }
                    }
                }
                if is_max {
                    candidates.push((
                        Blob {
                            x: x as f64,
                            y: y as f64,
                            sigma: sigmas[s],
                        },
                        v,
                    ));
                }
            }
        }
    }
    Ok(prune_blobs(candidates, params.overlap))
}

/// Greedy suppression: larger blobs first, stronger first among equals; a
/// blob is dropped if it overlaps an accepted one by more than `overlap`.
fn prune_blobs(mut candidates: Vec<(Blob, f64)>, overlap: f64) -> Vec<Blob> {
    candidates.sort_by(|(a, va), (b, vb)| {
        b.sigma
            .total_cmp(&a.sigma)
            .then(vb.total_cmp(va))
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
    });
    let mut kept: Vec<Blob> = Vec::new();
    for (blob, _) in candidates {
        if kept.iter().all(|k| blob_overlap(k, &blob) <= overlap) {
            kept.push(blob);
        }
    }
    kept.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.x.total_cmp(&b.x)).then(a.sigma.total_cmp(&b.sigma)));
    kept
}

/// Intersection area of the two blob disks (radius `sigma * sqrt 2`) as a
/// fraction of the smaller disk.
pub fn blob_overlap(a: &Blob, b: &Blob) -> f64 {
    let r1 = a.sigma * SQRT_2;
    let r2 = b.sigma * SQRT_2;
    let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
    if d >= r1 + r2 {
        return 0.0;
    }
    let rmin = r1.min(r2);
    if d <= (r1 - r2).abs() {
        return 1.0;
    }
    let ratio1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let ratio2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let a1 = r1 * r1 * ratio1.acos();
    let a2 = r2 * r2 * ratio2.acos();
    let a3 = 0.5 * ((-d + r2 + r1) * (d + r2 - r1) * (d - r2 + r1) * (d + r2 + r1)).max(0.0).sqrt();
    (a1 + a2 - a3) / (PI * rmin * rmin)
}
