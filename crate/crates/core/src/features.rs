//! Named per-region feature tables shared by all extractor families.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::color::ColorSpaceId;
use crate::error::{Error, Result};

/// One row per region, one column per named feature.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureSlice {
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl FeatureSlice {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(bad) = rows.iter().position(|r| r.len() != names.len()) {
            return Err(Error::DimensionMismatch(format!(
                "row {bad} has {} values for {} names",
                rows[bad].len(),
                names.len()
            )));
        }
        Ok(Self { names, rows })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<f64>> {
        self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// Appends `other`'s columns to the right. Row counts must agree unless
    /// `self` has no columns yet.
    pub fn hconcat(mut self, other: FeatureSlice) -> Result<Self> {
        if self.names.is_empty() {
            return Ok(other);
        }
        if self.rows.len() != other.rows.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot join {} rows with {} rows",
                self.rows.len(),
                other.rows.len()
            )));
        }
        self.names.extend(other.names);
        for (row, extra) in self.rows.iter_mut().zip(other.rows) {
            row.extend(extra);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Color,
    Shape,
    Texture,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Color, Family::Shape, Family::Texture];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Color => "color",
            Family::Shape => "shape",
            Family::Texture => "texture",
        }
    }

    /// Recovers the family from a feature column name.
    pub fn classify(name: &str) -> Option<Family> {
        if name.starts_with("gabor_") || name.starts_with("glcm_") || name.starts_with("lbp_") {
            return Some(Family::Texture);
        }
        if name.starts_with("corner_") || name.starts_with("blob_") || name.starts_with("canny_") {
            return Some(Family::Shape);
        }
        let (space, rest) = name.rsplit_once('_').and_then(|(head, _stat)| head.rsplit_once('_'))?;
        if rest.parse::<usize>().is_ok() && ColorSpaceId::from_str(space).is_ok() {
            Some(Family::Color)
        } else {
            None
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "color" => Ok(Family::Color),
            "shape" => Ok(Family::Shape),
            "texture" => Ok(Family::Texture),
            other => Err(Error::Config(format!("unknown feature family `{other}`"))),
        }
    }
}
