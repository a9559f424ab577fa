//! Border-aware linear filtering on single-channel `f32` rasters.
//!
//! All filters treat borders as reflect-101 (`c b | a b c d | c b`) and
//! compute correlation, i.e. kernels are not flipped.

use rayon::prelude::*;

use crate::imaging::GrayRaster;

/// Maps a possibly out-of-range index onto `0..n` by reflect-101 folding.
#[inline]
pub fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m < n as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Full 2-D correlation with an odd `kw`x`kh` kernel.
pub fn correlate2d(img: &GrayRaster, kernel: &[f32], kw: usize, kh: usize) -> GrayRaster {
    assert!(kw % 2 == 1 && kh % 2 == 1 && kernel.len() == kw * kh);
    let (w, h) = (img.width(), img.height());
    let (rx, ry) = ((kw / 2) as isize, (kh / 2) as isize);
    let src = img.data();
    let xmap: Vec<usize> = (-rx..w as isize + rx).map(|x| reflect101(x, w)).collect();
    let mut out = vec![0f32; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            let mut acc = 0f64;
            for ky in 0..kh {
                let sy = reflect101(y as isize + ky as isize - ry, h);
                let srow = &src[sy * w..(sy + 1) * w];
                let krow = &kernel[ky * kw..(ky + 1) * kw];
                let xs = &xmap[x..x + kw];
                for (k, &sx) in krow.iter().zip(xs) {
                    acc += (*k as f64) * (srow[sx] as f64);
                }
            }
            *o = acc as f32;
        }
    });
    GrayRaster::new(w, h, 1, out).expect("same shape")
}

/// Separable correlation: `kx` along rows, then `ky` along columns.
pub fn separable(img: &GrayRaster, kx: &[f64], ky: &[f64]) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let (rx, ry) = ((kx.len() / 2) as isize, (ky.len() / 2) as isize);
    let src = img.data();
    let mut tmp = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kx
                .iter()
                .enumerate()
                .map(|(i, k)| k * src[y * w + reflect101(x as isize + i as isize - rx, w)] as f64)
                .sum();
        }
    }
    let mut out = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = ky
                .iter()
                .enumerate()
                .map(|(i, k)| k * tmp[reflect101(y as isize + i as isize - ry, h) * w + x])
                .sum();
        }
    }
    out
}

/// 3x3 Sobel derivatives `(d/dx, d/dy)`.
pub fn sobel(img: &GrayRaster) -> (Vec<f64>, Vec<f64>) {
    let gx = separable(img, &[-1.0, 0.0, 1.0], &[1.0, 2.0, 1.0]);
    let gy = separable(img, &[1.0, 2.0, 1.0], &[-1.0, 0.0, 1.0]);
    (gx, gy)
}

/// Sum over a `block`x`block` window centred on each pixel (reflect-101).
pub fn box_sum(values: &[f64], w: usize, h: usize, block: usize) -> Vec<f64> {
    let r = (block / 2) as isize;
    let mut tmp = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = (-r..=r).map(|d| values[y * w + reflect101(x as isize + d, w)]).sum();
        }
    }
    let mut out = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = (-r..=r).map(|d| tmp[reflect101(y as isize + d, h) * w + x]).sum();
        }
    }
    out
}

/// Sampled Gaussian of standard deviation `sigma` and its first two
/// derivatives, truncated at `4 sigma`, laid out for correlation so that
/// correlating with `d1` yields `+f'`. The smoothing kernel sums to 1.
pub fn gaussian_kernels(sigma: f64) -> [Vec<f64>; 3] {
    let radius = (4.0 * sigma).ceil().max(1.0) as isize;
    let g: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = g.iter().sum();
    let g: Vec<f64> = g.into_iter().map(|v| v / norm).collect();
    let s2 = sigma * sigma;
    let d1 = (-radius..=radius)
        .zip(&g)
        .map(|(x, v)| (x as f64) / s2 * v)
        .collect();
    let d2 = (-radius..=radius)
        .zip(&g)
        .map(|(x, v)| ((x * x) as f64 / s2 - 1.0) / s2 * v)
        .collect();
    [g, d1, d2]
}
