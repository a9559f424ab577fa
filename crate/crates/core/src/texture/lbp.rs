//! Rotation-invariant uniform local binary patterns on a 3x3 window.
//!
//! Neighbours are visited clockwise from the top-left corner; neighbour `i`
//! sets bit `i` when it is strictly brighter than the centre:
//!
//! ```text
//! 0 1 2
//! 7 c 3
//! 6 5 4
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSlice;
use crate::imaging::{ImageRaster, RegionGrid};
use crate::stats::entropy;

pub const LBP_BINS: usize = 10;
pub const NON_UNIFORM_BIN: u8 = 9;

const NEIGHBOURS: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LbpCode {
    pub value: u8,
    /// Minimum over the eight circular rotations of `value`.
    pub rotated_value: u8,
    /// At most two circular 0/1 transitions.
    pub uniform: bool,
    /// Number of set bits for uniform codes, [`NON_UNIFORM_BIN`] otherwise.
    pub bin: u8,
}

#[inline]
pub fn transitions(value: u8) -> u32 {
    (value ^ value.rotate_right(1)).count_ones()
}

#[inline]
pub fn rotation_min(value: u8) -> u8 {
    (0..8).map(|r| value.rotate_right(r)).min().expect("eight rotations")
}

pub fn classify(value: u8) -> LbpCode {
    let uniform = transitions(value) <= 2;
    LbpCode {
        value,
        rotated_value: rotation_min(value),
        uniform,
        bin: if uniform { value.count_ones() as u8 } else { NON_UNIFORM_BIN },
    }
}

/// Code of a row-major 3x3 neighbourhood.
pub fn rlbp_ulbp_code(neighbourhood: &[u8; 9]) -> LbpCode {
    let centre = neighbourhood[4];
    let mut value = 0u8;
    for (bit, (dx, dy)) in NEIGHBOURS.iter().enumerate() {
        let idx = ((1 + dy) * 3 + (1 + dx)) as usize;
        if neighbourhood[idx] > centre {
            value |= 1 << bit;
        }
    }
    classify(value)
}

/// Normalized 10-bin histogram over the interior pixels of a block.
pub fn lbp_histogram(block: &ImageRaster<u8>) -> Result<[f64; LBP_BINS]> {
    let (w, h) = (block.width(), block.height());
    if w < 3 || h < 3 {
        return Err(Error::DegenerateRegion(format!("{w}x{h} block is smaller than 3x3")));
    }
    let mut counts = [0usize; LBP_BINS];
    let mut nb = [0u8; 9];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            for (i, v) in nb.iter_mut().enumerate() {
                *v = block.get(x + i % 3 - 1, y + i / 3 - 1, 0);
            }
            counts[rlbp_ulbp_code(&nb).bin as usize] += 1;
        }
    }
    let total = ((w - 2) * (h - 2)) as f64;
    Ok(counts.map(|c| c as f64 / total))
}

pub fn lbp_feature_names() -> Vec<String> {
    (0..LBP_BINS)
        .map(|b| format!("lbp_bin{b}"))
        .chain(std::iter::once("lbp_entropy".to_string()))
        .collect()
}

/// Ten bin frequencies followed by the histogram entropy.
pub fn lbp_features(block: &ImageRaster<u8>) -> Result<Vec<f64>> {
    let hist = lbp_histogram(block)?;
    let mut out = hist.to_vec();
    out.push(entropy(&hist));
    Ok(out)
}

pub fn extract_lbp_features(gray: &ImageRaster<u8>, grid: &RegionGrid) -> Result<FeatureSlice> {
    let k = grid.ksize;
    let rows = grid
        .regions
        .iter()
        .map(|&(x0, y0)| lbp_features(&gray.crop(x0, y0, k, k)))
        .collect::<Result<Vec<_>>>()?;
    FeatureSlice::new(lbp_feature_names(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_block() {
        let c = rlbp_ulbp_code(&[9; 9]);
        assert_eq!((c.value, c.rotated_value, c.uniform, c.bin), (0, 0, true, 0));
    }

    #[test]
    fn single_brighter_neighbour() {
        for pos in [0usize, 1, 2, 3, 5, 6, 7, 8] {
            let mut nb = [5u8; 9];
            nb[pos] = 6;
            let c = rlbp_ulbp_code(&nb);
            assert_eq!(c.value.count_ones(), 1);
            assert_eq!(c.rotated_value, 1);
            assert!(c.uniform);
            assert_eq!(transitions(c.value), 2);
        }
    }

    #[test]
    fn alternating_is_non_uniform() {
        let c = classify(0b0101_0101);
        assert_eq!(transitions(0b0101_0101), 8);
        assert!(!c.uniform);
        assert_eq!(c.bin, NON_UNIFORM_BIN);
    }

    #[test]
    fn rotated_value_is_orbit_invariant() {
        for v in 0..=255u8 {
            let c = classify(v);
            assert!(c.rotated_value <= v);
            for r in 0..8 {
                assert_eq!(classify(v.rotate_left(r)).rotated_value, c.rotated_value);
            }
        }
    }

    #[test]
    fn constant_region_in_zero_bin() {
        let b = ImageRaster::filled(5, 5, 1, 100u8);
        let h = lbp_histogram(&b).unwrap();
        assert_eq!(h[0], 1.0);
        assert!(h[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_small_region() {
        let b = ImageRaster::filled(2, 5, 1, 0u8);
        assert!(matches!(lbp_histogram(&b), Err(Error::DegenerateRegion(_))));
    }

    #[test]
    fn rotation_by_90_keeps_histogram() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [5usize, 8, 10] {
            let data: Vec<u8> = (0..n * n).map(|_| rng.random_range(0..8u8) * 30).collect();
            let b = ImageRaster::new(n, n, 1, data).unwrap();
            let rot = ImageRaster::from_fn(n, n, |x, y| b.get(y, n - 1 - x, 0));
            assert_eq!(lbp_histogram(&b).unwrap(), lbp_histogram(&rot).unwrap());
        }
    }

    #[test]
    fn random_histogram_sums_to_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let data: Vec<u8> = (0..64).map(|_| rng.random()).collect();
        let h = lbp_histogram(&ImageRaster::new(8, 8, 1, data).unwrap()).unwrap();
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn monotone_lut_keeps_codes() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let data: Vec<u8> = (0..100).map(|_| rng.random_range(0..200u8)).collect();
        let b = ImageRaster::new(10, 10, 1, data).unwrap();
        let luts: [fn(u8) -> u8; 3] = [|v| v + 55, |v| (v as u32 * 255 / 199) as u8, |v| v / 4 + v];
        for lut in luts {
            assert_eq!(lbp_histogram(&b).unwrap(), lbp_histogram(&b.map(lut)).unwrap());
        }
    }
}
