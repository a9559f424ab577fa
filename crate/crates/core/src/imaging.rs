//! Raster types, mask ingestion, checkerboard region tiling and decile labels.
//!
//! Coordinates are `(x, y)` = `(column, row)` with the origin at the top-left
//! corner; every buffer is row-major.

use std::path::Path;

use image::{ColorType, DynamicImage, ImageReader};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The k-sizes swept by the default pipeline.
pub const DEFAULT_KSIZES: [usize; 5] = [5, 10, 15, 20, 25];

/// A dense row-major raster with `channels` interleaved samples per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRaster<T> {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<T>,
}

pub type RgbRaster = ImageRaster<u8>;
pub type GrayRaster = ImageRaster<f32>;

impl<T: Copy> ImageRaster<T> {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Format(format!("channels {channels}, expected 1 or 3")));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch(format!(
                "buffer of {} samples for {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: T) -> Self {
        Self::new(width, height, channels, vec![value; width * height * channels])
            .expect("filled raster is consistent")
    }

    /// Builds a single-channel raster from `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            channels: 1,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> T {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, value: T) {
        self.data[(y * self.width + x) * self.channels + c] = value;
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[T] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// Copies out the `w`x`h` window anchored at `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        assert!(x0 + w <= self.width && y0 + h <= self.height, "crop out of bounds");
        let mut data = Vec::with_capacity(w * h * self.channels);
        for y in y0..y0 + h {
            let start = (y * self.width + x0) * self.channels;
            data.extend_from_slice(&self.data[start..start + w * self.channels]);
        }
        Self {
            width: w,
            height: h,
            channels: self.channels,
            data,
        }
    }

    /// Extracts channel `c` as a single-channel raster.
    pub fn channel(&self, c: usize) -> Self {
        let data = self.data.iter().skip(c).step_by(self.channels).copied().collect();
        Self {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> ImageRaster<U> {
        ImageRaster {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// BT.601 luma of an 8-bit RGB triple, in 8-bit units.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> f32 {
    0.299 * r as f32 + 0.587 * g as f32 + 0.114 * b as f32
}

impl ImageRaster<u8> {
    /// Luma normalized to `[0, 1]`.
    pub fn to_gray_f32(&self) -> GrayRaster {
        match self.channels {
            1 => self.map(|v| v as f32 / 255.0),
            _ => {
                let data = self
                    .data
                    .chunks_exact(3)
                    .map(|p| luma(p[0], p[1], p[2]) / 255.0)
                    .collect();
                ImageRaster {
                    width: self.width,
                    height: self.height,
                    channels: 1,
                    data,
                }
            }
        }
    }

    /// Luma rounded to 8 bits.
    pub fn to_gray_u8(&self) -> ImageRaster<u8> {
        match self.channels {
            1 => self.clone(),
            _ => {
                let data = self
                    .data
                    .chunks_exact(3)
                    .map(|p| luma(p[0], p[1], p[2]).round().clamp(0.0, 255.0) as u8)
                    .collect();
                ImageRaster {
                    width: self.width,
                    height: self.height,
                    channels: 1,
                    data,
                }
            }
        }
    }
}

/// Per-pixel binary annotation: 1 = component, 0 = background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl SemanticMask {
    /// Binarizes `data`: any nonzero value marks a component pixel.
    pub fn from_raw(width: usize, height: usize, data: &[u8]) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "mask buffer of {} for {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data: data.iter().map(|&v| u8::from(v != 0)).collect(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn component_pixels(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }

    pub fn check_pairs_with<T: Copy>(&self, image: &ImageRaster<T>) -> Result<()> {
        if self.width != image.width() || self.height != image.height() {
            return Err(Error::DimensionMismatch(format!(
                "mask {}x{} vs image {}x{}",
                self.width,
                self.height,
                image.width(),
                image.height()
            )));
        }
        Ok(())
    }
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other}", path.display())),
    })
}

fn depth_and_channels(color: ColorType) -> (u16, u8) {
    let channels = color.channel_count();
    (color.bits_per_pixel() / channels as u16, channels)
}

/// Loads an 8-bit RGB PNG or TIFF.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbRaster> {
    let path = path.as_ref();
    match decode(path)? {
        DynamicImage::ImageRgb8(buf) => {
            let (w, h) = buf.dimensions();
            ImageRaster::new(w as usize, h as usize, 3, buf.into_raw())
        }
        other => {
            let (depth, channels) = depth_and_channels(other.color());
            if depth != 8 {
                Err(Error::Format(format!("depth {depth}, expected 8")))
            } else {
                Err(Error::Format(format!("channels {channels}, expected 3")))
            }
        }
    }
}

fn encode_err(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other}", path.display())),
    }
}

/// Writes an RGB raster; the format follows the file extension.
pub fn save_image(image: &RgbRaster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if image.channels() != 3 {
        return Err(Error::Format(format!("channels {}, expected 3", image.channels())));
    }
    image::save_buffer(
        path,
        image.data(),
        image.width() as u32,
        image.height() as u32,
        ColorType::Rgb8,
    )
    .map_err(|e| encode_err(path, e))
}

/// Writes a mask with component pixels at 255.
pub fn save_mask(mask: &SemanticMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let data: Vec<u8> = mask.data().iter().map(|&v| v * 255).collect();
    image::save_buffer(path, &data, mask.width() as u32, mask.height() as u32, ColorType::L8)
        .map_err(|e| encode_err(path, e))
}

/// Loads an 8-bit single-channel mask; any nonzero pixel is a component.
pub fn load_mask(path: impl AsRef<Path>) -> Result<SemanticMask> {
    let path = path.as_ref();
    match decode(path)? {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            SemanticMask::from_raw(w as usize, h as usize, buf.as_raw())
        }
        other => {
            let (depth, channels) = depth_and_channels(other.color());
            if depth != 8 {
                Err(Error::Format(format!("mask depth {depth}, expected 8")))
            } else {
                Err(Error::Format(format!("mask channels {channels}, expected 1")))
            }
        }
    }
}

/// Non-overlapping `ksize`x`ksize` tiles in row-major order. Partial strips
/// on the right and bottom borders are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub ksize: usize,
    pub rows: usize,
    pub cols: usize,
    pub regions: Vec<(usize, usize)>,
}

impl RegionGrid {
    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Covered extent `(width, height)` in pixels.
    pub fn extent(&self) -> (usize, usize) {
        (self.cols * self.ksize, self.rows * self.ksize)
    }
}

pub fn build_region_grid(width: usize, height: usize, ksize: usize) -> Result<RegionGrid> {
    if ksize < 1 || ksize > width || ksize > height {
        return Err(Error::InvalidKsize {
            ksize,
            width,
            height,
        });
    }
    let cols = width / ksize;
    let rows = height / ksize;
    let regions = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (c * ksize, r * ksize)))
        .collect();
    Ok(RegionGrid {
        ksize,
        rows,
        cols,
        regions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub region_index: usize,
    pub decile: u8,
    pub fraction: f64,
}

/// `round(10 * count / area)` with halves rounded up, in exact integer arithmetic.
pub fn decile_from_count(count: usize, area: usize) -> u8 {
    debug_assert!(area > 0 && count <= area);
    ((20 * count + area) / (2 * area)) as u8
}

pub fn decile_from_fraction(fraction: f64) -> u8 {
    (10.0 * fraction + 0.5).floor().clamp(0.0, 10.0) as u8
}

pub fn label_regions(grid: &RegionGrid, mask: &SemanticMask) -> Result<Vec<RegionLabel>> {
    let (w, h) = grid.extent();
    if mask.width() < w || mask.height() < h {
        return Err(Error::DimensionMismatch(format!(
            "mask {}x{} smaller than grid extent {w}x{h}",
            mask.width(),
            mask.height()
        )));
    }
    let k = grid.ksize;
    let area = k * k;
    Ok(grid
        .regions
        .iter()
        .enumerate()
        .map(|(region_index, &(x0, y0))| {
            let count: usize = (y0..y0 + k)
                .map(|y| {
                    let row = &mask.data()[y * mask.width() + x0..y * mask.width() + x0 + k];
                    row.iter().map(|&v| v as usize).sum::<usize>()
                })
                .sum();
            RegionLabel {
                region_index,
                decile: decile_from_count(count, area),
                fraction: count as f64 / area as f64,
            }
        })
        .collect())
}
