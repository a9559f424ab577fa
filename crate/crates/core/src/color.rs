//! Conversions from 8-bit sRGB into thirteen color spaces, and per-region
//! channel statistics named `SPACE_c_stat`.
//!
//! Pinned conversions (input `r, g, b` are 8-bit values divided by 255):
//!
//! | space    | channels (0, 1, 2) | definition |
//! |----------|--------------------|------------|
//! | RGB      | R, G, B            | identity, in `[0, 1]` |
//! | RGB_CIE  | R, G, B (CIE 1931) | inverse CIE-RGB primaries applied to XYZ |
//! | HSV      | H (deg), S, V      | hexcone model |
//! | HLS      | H (deg), L, S      | double-hexcone model |
//! | LAB      | L*, a*, b*         | CIE 1976 from XYZ, D65 white |
//! | LUV      | L*, u*, v*         | CIE 1976 from XYZ, D65 white |
//! | YCrCb    | Y, Cr, Cb          | BT.601 luma, chroma offset by 0.5 |
//! | YDbDr    | Y, Db, Dr          | BT.601 luma, SECAM chroma |
//! | YPbPr    | Y, Pb, Pr          | BT.601 analog component |
//! | XYZ      | X, Y, Z            | linearized sRGB, D65 matrix |
//! | YIQ      | Y, I, Q            | NTSC |
//! | YUV      | Y, U, V            | BT.601 |
//! | HED      | H, E, D            | Ruifrok-Johnston stain deconvolution of optical density |

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSlice;
use crate::imaging::{ImageRaster, RegionGrid, RgbRaster};
use crate::stats::{lower_median, mean};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColorSpaceId {
    #[serde(rename = "RGB")]
    Rgb,
    #[serde(rename = "RGB_CIE")]
    RgbCie,
    #[serde(rename = "HSV")]
    Hsv,
    #[serde(rename = "HLS")]
    Hls,
    #[serde(rename = "LAB")]
    Lab,
    #[serde(rename = "LUV")]
    Luv,
    #[serde(rename = "YCrCb")]
    YCrCb,
    #[serde(rename = "YDbDr")]
    YDbDr,
    #[serde(rename = "YPbPr")]
    YPbPr,
    #[serde(rename = "XYZ")]
    Xyz,
    #[serde(rename = "YIQ")]
    Yiq,
    #[serde(rename = "YUV")]
    Yuv,
    #[serde(rename = "HED")]
    Hed,
}

impl ColorSpaceId {
    pub const ALL: [ColorSpaceId; 13] = [
        ColorSpaceId::Rgb,
        ColorSpaceId::RgbCie,
        ColorSpaceId::Hsv,
        ColorSpaceId::Hls,
        ColorSpaceId::Lab,
        ColorSpaceId::Luv,
        ColorSpaceId::YCrCb,
        ColorSpaceId::YDbDr,
        ColorSpaceId::YPbPr,
        ColorSpaceId::Xyz,
        ColorSpaceId::Yiq,
        ColorSpaceId::Yuv,
        ColorSpaceId::Hed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ColorSpaceId::Rgb => "RGB",
            ColorSpaceId::RgbCie => "RGB_CIE",
            ColorSpaceId::Hsv => "HSV",
            ColorSpaceId::Hls => "HLS",
            ColorSpaceId::Lab => "LAB",
            ColorSpaceId::Luv => "LUV",
            ColorSpaceId::YCrCb => "YCrCb",
            ColorSpaceId::YDbDr => "YDbDr",
            ColorSpaceId::YPbPr => "YPbPr",
            ColorSpaceId::Xyz => "XYZ",
            ColorSpaceId::Yiq => "YIQ",
            ColorSpaceId::Yuv => "YUV",
            ColorSpaceId::Hed => "HED",
        }
    }

    pub fn channel_names(self) -> [&'static str; 3] {
        match self {
            ColorSpaceId::Rgb | ColorSpaceId::RgbCie => ["R", "G", "B"],
            ColorSpaceId::Hsv => ["H", "S", "V"],
            ColorSpaceId::Hls => ["H", "L", "S"],
            ColorSpaceId::Lab => ["L", "a", "b"],
            ColorSpaceId::Luv => ["L", "u", "v"],
            ColorSpaceId::YCrCb => ["Y", "Cr", "Cb"],
            ColorSpaceId::YDbDr => ["Y", "Db", "Dr"],
            ColorSpaceId::YPbPr => ["Y", "Pb", "Pr"],
            ColorSpaceId::Xyz => ["X", "Y", "Z"],
            ColorSpaceId::Yiq => ["Y", "I", "Q"],
            ColorSpaceId::Yuv => ["Y", "U", "V"],
            ColorSpaceId::Hed => ["H", "E", "D"],
        }
    }

    /// Nominal `(min, max)` of each output channel over all 8-bit sRGB inputs.
    pub fn channel_ranges(self) -> [(f64, f64); 3] {
        match self {
            ColorSpaceId::Rgb => [(0.0, 1.0); 3],
            ColorSpaceId::Hsv => [(0.0, 360.0), (0.0, 1.0), (0.0, 1.0)],
            ColorSpaceId::Hls => [(0.0, 360.0), (0.0, 1.0), (0.0, 1.0)],
            ColorSpaceId::Lab => [(0.0, 100.0), (-86.2, 98.3), (-107.9, 94.5)],
            ColorSpaceId::Luv => [(0.0, 100.0), (-83.1, 175.1), (-134.2, 107.4)],
            ColorSpaceId::YCrCb => [(0.0, 1.0); 3],
            ColorSpaceId::YDbDr => [(0.0, 1.0), (-1.333, 1.333), (-1.333, 1.333)],
            ColorSpaceId::YPbPr => [(0.0, 1.0), (-0.5, 0.5), (-0.5, 0.5)],
            ColorSpaceId::Xyz => [(0.0, 0.9505), (0.0, 1.0), (0.0, 1.0889)],
            ColorSpaceId::Yiq => [(0.0, 1.0), (-0.5957, 0.5957), (-0.5226, 0.5226)],
            ColorSpaceId::Yuv => [(0.0, 1.0), (-0.436, 0.436), (-0.615, 0.615)],
            // The remaining two are computed by sweeping the RGB cube once.
            ColorSpaceId::RgbCie | ColorSpaceId::Hed => *SWEPT_RANGES
                .iter()
                .find(|(s, _)| *s == self)
                .map(|(_, r)| r)
                .expect("swept"),
        }
    }
}

type ChannelRanges = [(f64, f64); 3];

static SWEPT_RANGES: LazyLock<Vec<(ColorSpaceId, ChannelRanges)>> = LazyLock::new(|| {
    [ColorSpaceId::RgbCie, ColorSpaceId::Hed]
        .into_iter()
        .map(|space| {
            let mut r = [(f64::INFINITY, f64::NEG_INFINITY); 3];
            for rr in (0..=255).step_by(15) {
                for gg in (0..=255).step_by(15) {
                    for bb in (0..=255).step_by(15) {
                        let out = convert_pixel(space, [rr as u8, gg as u8, bb as u8]);
                        for c in 0..3 {
                            r[c].0 = r[c].0.min(out[c]);
                            r[c].1 = r[c].1.max(out[c]);
                        }
                    }
                }
            }
            (space, r)
        })
        .collect()
});

impl fmt::Display for ColorSpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ColorSpaceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ColorSpaceId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnsupportedSpace(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy)]
struct Mat3([[f64; 3]; 3]);

impl Mat3 {
    fn mul(&self, v: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    fn scale(&self, s: f64) -> Mat3 {
        Mat3(self.0.map(|row| row.map(|v| v * s)))
    }

    fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    fn inverse(&self) -> Mat3 {
        let m = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
        Mat3(adj).scale(1.0 / det)
    }
}

const XYZ_FROM_SRGB: Mat3 = Mat3([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
]);

/// D65 white as the image of sRGB white, so white maps to a* = b* = 0 exactly.
const WHITE_D65: [f64; 3] = [
    0.4124564 + 0.3575761 + 0.1804375,
    0.2126729 + 0.7151522 + 0.0721750,
    0.0193339 + 0.1191920 + 0.9503041,
];

static RGBCIE_FROM_XYZ: LazyLock<Mat3> = LazyLock::new(|| {
    Mat3([[0.49, 0.31, 0.20], [0.17697, 0.81240, 0.01063], [0.00, 0.01, 0.99]])
        .scale(1.0 / 0.17697)
        .inverse()
});

// Rows are the optical-density vectors of haematoxylin, eosin and DAB.
const RGB_FROM_HED: Mat3 = Mat3([[0.65, 0.70, 0.29], [0.07, 0.99, 0.11], [0.27, 0.57, 0.78]]);

// Stains are `od_row · inv(RGB_FROM_HED)`; stored transposed for `Mat3::mul`.
static HED_FROM_RGB_T: LazyLock<Mat3> = LazyLock::new(|| RGB_FROM_HED.inverse().transpose());

const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

#[inline]
fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn xyz(rgb: [f64; 3]) -> [f64; 3] {
    XYZ_FROM_SRGB.mul(rgb.map(srgb_to_linear))
}

const LAB_EPS: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPS {
        t.cbrt()
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

fn lab(rgb: [f64; 3]) -> [f64; 3] {
    let [x, y, z] = xyz(rgb);
    let fx = lab_f(x / WHITE_D65[0]);
    let fy = lab_f(y / WHITE_D65[1]);
    let fz = lab_f(z / WHITE_D65[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

fn luv(rgb: [f64; 3]) -> [f64; 3] {
    let [x, y, z] = xyz(rgb);
    let yr = y / WHITE_D65[1];
    let l = if yr > LAB_EPS {
        116.0 * yr.cbrt() - 16.0
    } else {
        LAB_KAPPA * yr
    };
    let uv = |x: f64, y: f64, z: f64| {
        let d = x + 15.0 * y + 3.0 * z;
        if d == 0.0 {
            (0.0, 0.0)
        } else {
            (4.0 * x / d, 9.0 * y / d)
        }
    };
    let (u, v) = uv(x, y, z);
    let (un, vn) = uv(WHITE_D65[0], WHITE_D65[1], WHITE_D65[2]);
    if l == 0.0 {
        return [0.0, 0.0, 0.0];
    }
    [l, 13.0 * l * (u - un), 13.0 * l * (v - vn)]
}

fn hue(r: f64, g: f64, b: f64, max: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    let h = if max == r {
        (g - b) / delta
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    (60.0 * h).rem_euclid(360.0)
}

/// `[r, g, b]` in `[0, 1]` to `[H (deg), S, V]`.
pub fn rgb_to_hsv(rgb: [f64; 3]) -> [f64; 3] {
    let [r, g, b] = rgb;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max == 0.0 { 0.0 } else { delta / max };
    [hue(r, g, b, max, delta), s, max]
}

pub fn hsv_to_rgb(hsv: [f64; 3]) -> [f64; 3] {
    let [h, s, v] = hsv;
    let c = v * s;
    let hp = (h / 60.0).rem_euclid(6.0);
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = sector(hp, c, x);
    let m = v - c;
    [r + m, g + m, b + m]
}

/// `[r, g, b]` in `[0, 1]` to `[H (deg), L, S]`.
pub fn rgb_to_hls(rgb: [f64; 3]) -> [f64; 3] {
    let [r, g, b] = rgb;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let l = (max + min) / 2.0;
    let s = if delta == 0.0 {
        0.0
    } else {
        delta / (1.0 - (2.0 * l - 1.0).abs())
    };
    [hue(r, g, b, max, delta), l, s]
}

pub fn hls_to_rgb(hls: [f64; 3]) -> [f64; 3] {
    let [h, l, s] = hls;
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = (h / 60.0).rem_euclid(6.0);
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = sector(hp, c, x);
    let m = l - c / 2.0;
    [r + m, g + m, b + m]
}

fn sector(hp: f64, c: f64, x: f64) -> (f64, f64, f64) {
    match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    }
}

fn luma_of(rgb: [f64; 3]) -> f64 {
    LUMA[0] * rgb[0] + LUMA[1] * rgb[1] + LUMA[2] * rgb[2]
}

/// Converts one 8-bit sRGB pixel.
pub fn convert_pixel(space: ColorSpaceId, pixel: [u8; 3]) -> [f64; 3] {
    let rgb = pixel.map(|v| v as f64 / 255.0);
    let [r, g, b] = rgb;
    match space {
        ColorSpaceId::Rgb => rgb,
        ColorSpaceId::RgbCie => RGBCIE_FROM_XYZ.mul(xyz(rgb)),
        ColorSpaceId::Hsv => rgb_to_hsv(rgb),
        ColorSpaceId::Hls => rgb_to_hls(rgb),
        ColorSpaceId::Lab => lab(rgb),
        ColorSpaceId::Luv => luv(rgb),
        ColorSpaceId::YCrCb => {
            let y = luma_of(rgb);
            [y, (r - y) * 0.713 + 0.5, (b - y) * 0.564 + 0.5]
        }
        ColorSpaceId::YDbDr => [
            luma_of(rgb),
            -0.450 * r - 0.883 * g + 1.333 * b,
            -1.333 * r + 1.116 * g + 0.217 * b,
        ],
        ColorSpaceId::YPbPr => [
            luma_of(rgb),
            -0.168736 * r - 0.331264 * g + 0.5 * b,
            0.5 * r - 0.418688 * g - 0.081312 * b,
        ],
        ColorSpaceId::Xyz => xyz(rgb),
        ColorSpaceId::Yiq => [
            luma_of(rgb),
            0.595716 * r - 0.274453 * g - 0.321263 * b,
            0.211456 * r - 0.522591 * g + 0.311135 * b,
        ],
        ColorSpaceId::Yuv => [
            luma_of(rgb),
            -0.14713 * r - 0.28886 * g + 0.436 * b,
            0.615 * r - 0.51499 * g - 0.10001 * b,
        ],
        ColorSpaceId::Hed => {
            let log_adjust = 1e-6f64.ln();
            let od = rgb.map(|c| c.max(1e-6).ln() / log_adjust);
            HED_FROM_RGB_T.mul(od).map(|s| s.max(0.0))
        }
    }
}

pub fn convert_color_space(image: &RgbRaster, space: ColorSpaceId) -> Result<ImageRaster<f32>> {
    if image.channels() != 3 {
        return Err(Error::Format(format!("channels {}, expected 3", image.channels())));
    }
    let data = image
        .data()
        .chunks_exact(3)
        .flat_map(|p| convert_pixel(space, [p[0], p[1], p[2]]).map(|v| v as f32))
        .collect();
    ImageRaster::new(image.width(), image.height(), 3, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorStat {
    Mean,
    #[serde(alias = "median")]
    Med,
}

impl ColorStat {
    pub fn as_str(self) -> &'static str {
        match self {
            ColorStat::Mean => "mean",
            ColorStat::Med => "med",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorFeatureSpec {
    pub spaces: Vec<ColorSpaceId>,
    pub stats: Vec<ColorStat>,
}

impl Default for ColorFeatureSpec {
    fn default() -> Self {
        Self {
            spaces: ColorSpaceId::ALL.to_vec(),
            stats: vec![ColorStat::Mean, ColorStat::Med],
        }
    }
}

impl ColorFeatureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.spaces.is_empty() || self.stats.is_empty() {
            return Err(Error::InvalidParams("color spec needs a space and a stat".into()));
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.spaces.len() * 3 * self.stats.len());
        for space in &self.spaces {
            for c in 0..3 {
                for stat in &self.stats {
                    names.push(feature_name(*space, c, *stat));
                }
            }
        }
        names
    }
}

pub fn feature_name(space: ColorSpaceId, channel: usize, stat: ColorStat) -> String {
    format!("{}_{}_{}", space.as_str(), channel, stat.as_str())
}

/// Inverse of [`feature_name`].
pub fn parse_feature_name(name: &str) -> Option<(ColorSpaceId, usize, ColorStat)> {
    let (head, stat) = name.rsplit_once('_')?;
    let (space, channel) = head.rsplit_once('_')?;
    let stat = match stat {
        "mean" => ColorStat::Mean,
        "med" => ColorStat::Med,
        _ => return None,
    };
    let channel: usize = channel.parse().ok().filter(|c| *c < 3)?;
    Some((space.parse().ok()?, channel, stat))
}

fn region_values(converted: &ImageRaster<f32>, x0: usize, y0: usize, k: usize, c: usize, buf: &mut Vec<f32>) {
    buf.clear();
    for y in y0..y0 + k {
        for x in x0..x0 + k {
            buf.push(converted.get(x, y, c));
        }
    }
}

pub fn extract_color_features(image: &RgbRaster, grid: &RegionGrid, spec: &ColorFeatureSpec) -> Result<FeatureSlice> {
    spec.validate()?;
    let (ew, eh) = grid.extent();
    if ew > image.width() || eh > image.height() {
        return Err(Error::DimensionMismatch(format!(
            "grid extent {ew}x{eh} exceeds image {}x{}",
            image.width(),
            image.height()
        )));
    }
    let k = grid.ksize;
    let mut rows = vec![Vec::with_capacity(spec.spaces.len() * 3 * spec.stats.len()); grid.len()];
    let mut buf = Vec::with_capacity(k * k);
    for &space in &spec.spaces {
        let converted = convert_color_space(image, space)?;
        for (row, &(x0, y0)) in rows.iter_mut().zip(&grid.regions) {
            for c in 0..3 {
                region_values(&converted, x0, y0, k, c, &mut buf);
                for stat in &spec.stats {
                    row.push(match stat {
                        ColorStat::Mean => mean(&buf),
                        ColorStat::Med => lower_median(&mut buf) as f64,
                    });
                }
            }
        }
    }
    FeatureSlice::new(spec.feature_names(), rows)
}
