//! Bilateral smoothing, Canny edges and external contour statistics.
//!
//! The pipeline runs in 8-bit intensity units: inputs in `[0, 1]` are
//! scaled by 255 so that colour sigma and hysteresis thresholds keep their
//! conventional meaning.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::filter::{reflect101, sobel};
use crate::imaging::GrayRaster;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeParams {
    pub bilateral_diameter: usize,
    pub bilateral_sigma_color: f64,
    pub bilateral_sigma_space: f64,
    /// Hysteresis thresholds are `mean * (1 -/+ threshold_ratio)`.
    pub threshold_ratio: f64,
    pub l2_gradient: bool,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self {
            bilateral_diameter: 7,
            bilateral_sigma_color: 50.0,
            bilateral_sigma_space: 50.0,
            threshold_ratio: 0.25,
            l2_gradient: false,
        }
    }
}

impl EdgeParams {
    /// `(low, high)` hysteresis thresholds from the mean gray level, clamped to `[0, 255]`.
    pub fn canny_thresholds(&self, mean_gray: f64) -> (f64, f64) {
        let low = (mean_gray - self.threshold_ratio * mean_gray).clamp(0.0, 255.0);
        let high = (mean_gray + self.threshold_ratio * mean_gray).clamp(0.0, 255.0);
        (low, high)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ContourStats {
    pub contour_count: usize,
    pub max_contour_area: f64,
    pub total_contour_perimeter: f64,
    pub edge_pixel_fraction: f64,
}

/// Edge-preserving smoothing over a circular window of the given diameter.
pub fn bilateral_filter(img: &[f64], w: usize, h: usize, diameter: usize, sigma_color: f64, sigma_space: f64) -> Vec<f64> {
    let radius = (diameter / 2) as isize;
    let gc = -0.5 / (sigma_color * sigma_color);
    let gs = -0.5 / (sigma_space * sigma_space);
    let mut offsets = Vec::new();
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let r2 = (dx * dx + dy * dy) as f64;
            if r2.sqrt() <= radius as f64 {
                offsets.push((dx, dy, (r2 * gs).exp()));
            }
        }
    }
    let mut out = vec![0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let centre = img[y * w + x];
            let (mut num, mut den) = (0.0, 0.0);
            for &(dx, dy, ws) in &offsets {
                let sx = reflect101(x as isize + dx, w);
                let sy = reflect101(y as isize + dy, h);
                let v = img[sy * w + sx];
                let d = v - centre;
                let wt = ws * (d * d * gc).exp();
                num += wt * v;
                den += wt;
            }
            out[y * w + x] = num / den;
        }
    }
    out
}

/// Binary Canny edge map over an image in 8-bit units.
pub fn canny(img: &[f64], w: usize, h: usize, low: f64, high: f64, l2_gradient: bool) -> Vec<bool> {
    let raster = GrayRaster::new(w, h, 1, img.iter().map(|&v| v as f32).collect()).expect("shape");
    let (gx, gy) = sobel(&raster);
    let mag: Vec<f64> = gx
        .iter()
        .zip(&gy)
        .map(|(a, b)| if l2_gradient { (a * a + b * b).sqrt() } else { a.abs() + b.abs() })
        .collect();
    let m = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    const TAN_22_5: f64 = 0.414_213_562_373_095_1;
    const TAN_67_5: f64 = 2.414_213_562_373_095;

    // 0 = suppressed, 1 = weak candidate, 2 = strong
    let mut state = vec![0u8; w * h];
    let mut queue = VecDeque::new();
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            let v = mag[i];
            if v <= low {
                continue;
            }
            let (ax, ay) = (gx[i].abs(), gy[i].abs());
            let is_peak = if ay < ax * TAN_22_5 {
                v > m(x - 1, y) && v >= m(x + 1, y)
            } else if ay > ax * TAN_67_5 {
                v > m(x, y - 1) && v >= m(x, y + 1)
            } else {
                let s = if (gx[i] < 0.0) != (gy[i] < 0.0) { -1 } else { 1 };
                v > m(x - s, y - 1) && v > m(x + s, y + 1)
            };
            if !is_peak {
                continue;
            }
            if v > high {
                state[i] = 2;
                queue.push_back((x, y));
            } else {
                state[i] = 1;
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if state[j] == 1 {
                    state[j] = 2;
                    queue.push_back((nx, ny));
                }
            }
        }
    }
    state.into_iter().map(|s| s == 2).collect()
}

// Clockwise on screen (y grows downward), starting east.
const DIRS: [(isize, isize); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

fn dir_index(dx: isize, dy: isize) -> usize {
    DIRS.iter().position(|&d| d == (dx, dy)).expect("unit step")
}

/// Outer boundaries of the 8-connected foreground components that are not
/// enclosed by another component. Each contour lists every boundary pixel.
pub fn external_contours(binary: &[bool], w: usize, h: usize) -> Vec<Vec<(isize, isize)>> {
    // pad by one background pixel on each side
    let pw = w + 2;
    let ph = h + 2;
    let mut fg = vec![false; pw * ph];
    for y in 0..h {
        for x in 0..w {
            fg[(y + 1) * pw + x + 1] = binary[y * w + x];
        }
    }
    let at = |x: isize, y: isize| -> bool { x >= 0 && y >= 0 && (x as usize) < pw && (y as usize) < ph && fg[y as usize * pw + x as usize] };

    // background reachable from the frame through 4-connected steps
    let mut exterior = vec![false; pw * ph];
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    exterior[0] = true;
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if nx < 0 || ny < 0 || nx as usize >= pw || ny as usize >= ph {
                continue;
            }
            let j = ny as usize * pw + nx as usize;
            if !fg[j] && !exterior[j] {
                exterior[j] = true;
                queue.push_back((nx as usize, ny as usize));
            }
        }
    }

    let mut component = vec![usize::MAX; pw * ph];
    let mut contours = Vec::new();
    let mut next_id = 0;
    for y in 1..=h {
        for x in 1..=w {
            let i = y * pw + x;
            if !fg[i] || component[i] != usize::MAX {
                continue;
            }
            // flood the 8-connected component, noting whether it touches the exterior
            let id = next_id;
            next_id += 1;
            let mut touches_exterior = false;
            let mut stack = vec![(x, y)];
            component[i] = id;
            while let Some((cx, cy)) = stack.pop() {
                for (dx, dy) in DIRS {
                    let (nx, ny) = ((cx as isize + dx) as usize, (cy as isize + dy) as usize);
                    let j = ny * pw + nx;
                    if fg[j] {
                        if component[j] == usize::MAX {
                            component[j] = id;
                            stack.push((nx, ny));
                        }
                    } else if (dx == 0 || dy == 0) && exterior[j] {
                        touches_exterior = true;
                    }
                }
            }
            if !touches_exterior {
                continue;
            }
            // (x, y) is the first pixel in raster order, so its west neighbour is background
            let start = (x as isize, y as isize);
            let mut points = vec![(start.0 - 1, start.1 - 1)];
            let west = dir_index(-1, 0);
            let first = (0..8)
                .map(|k| (west + k) % 8)
                .map(|d| (start.0 + DIRS[d].0, start.1 + DIRS[d].1))
                .find(|&(nx, ny)| at(nx, ny));
            let Some(first) = first else {
                contours.push(points);
                continue;
            };
            let mut prev = first;
            let mut cur = start;
            loop {
                let back = dir_index(prev.0 - cur.0, prev.1 - cur.1);
                let next = (1..=8)
                    .map(|k| (back + 8 - k) % 8)
                    .map(|d| (cur.0 + DIRS[d].0, cur.1 + DIRS[d].1))
                    .find(|&(nx, ny)| at(nx, ny))
                    .expect("component has a neighbour");
                if next == start && cur == first {
                    break;
                }
                prev = cur;
                cur = next;
                points.push((cur.0 - 1, cur.1 - 1));
            }
            contours.push(points);
        }
    }
    contours
}

/// Shoelace area of a closed polygon.
pub fn polygon_area(points: &[(isize, isize)]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut acc = 0i64;
    for (i, &(x0, y0)) in points.iter().enumerate() {
        let (x1, y1) = points[(i + 1) % points.len()];
        acc += (x0 * y1 - x1 * y0) as i64;
    }
    (acc as f64).abs() / 2.0
}

/// Closed chain length with unit axial and sqrt(2) diagonal steps.
pub fn chain_perimeter(points: &[(isize, isize)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    (0..points.len())
        .map(|i| {
            let (x0, y0) = points[i];
            let (x1, y1) = points[(i + 1) % points.len()];
            (((x1 - x0).pow(2) + (y1 - y0).pow(2)) as f64).sqrt()
        })
        .sum()
}

fn to_u8_level(v: f64) -> f64 {
    v.round().clamp(0.0, 255.0)
}

/// Bilateral filter, Canny with mean-derived thresholds, external contours.
pub fn canny_contour_features(gray: &GrayRaster, params: &EdgeParams) -> ContourStats {
    let (w, h) = (gray.width(), gray.height());
    if w == 0 || h == 0 {
        return ContourStats::default();
    }
    // 8-bit working domain throughout, so gradient ties along straight edges stay exact
    let img: Vec<f64> = gray.data().iter().map(|&v| to_u8_level(v as f64 * 255.0)).collect();
    let mean = img.iter().sum::<f64>() / img.len() as f64;
    let smooth = bilateral_filter(
        &img,
        w,
        h,
        params.bilateral_diameter,
        params.bilateral_sigma_color,
        params.bilateral_sigma_space,
    )
    .into_iter()
    .map(to_u8_level)
    .collect::<Vec<_>>();
    let (low, high) = params.canny_thresholds(mean);
    let edges = canny(&smooth, w, h, low, high, params.l2_gradient);
    let contours = external_contours(&edges, w, h);
    let edge_pixels = edges.iter().filter(|&&e| e).count();
    ContourStats {
        contour_count: contours.len(),
        max_contour_area: contours.iter().map(|c| polygon_area(c)).fold(0.0, f64::max),
        total_contour_perimeter: contours.iter().map(|c| chain_perimeter(c)).sum(),
        edge_pixel_fraction: edge_pixels as f64 / (w * h) as f64,
    }
}
