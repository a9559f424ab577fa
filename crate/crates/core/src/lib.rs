//! Interpretable color, shape and texture features for region-windowed PCB
//! images, ranked by random-forest Gini importance.

pub mod color;
pub mod error;
pub mod features;
pub mod filter;
pub mod imaging;
pub mod pipeline;
pub mod selection;
pub mod shape;
pub mod stats;
pub mod texture;

pub use error::{Error, Result};
pub use features::{Family, FeatureSlice};
pub use imaging::{ImageRaster, RegionGrid, RegionLabel, RgbRaster, GrayRaster, SemanticMask};
