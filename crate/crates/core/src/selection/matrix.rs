//! Labelled region-by-feature matrix and its CSV form.

use std::collections::HashSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::features::FeatureSlice;

pub const LABEL_COLUMN: &str = "label";

/// Regions of one (image, ksize) pair with their decile labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
    pub image_id: String,
    pub ksize: usize,
}

impl FeatureMatrix {
    pub fn new(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
        image_id: impl Into<String>,
        ksize: usize,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        if let Some(dup) = feature_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::Format(format!("duplicate feature name `{dup}`")));
        }
        if feature_names.iter().any(|n| n == LABEL_COLUMN) {
            return Err(Error::Format(format!("`{LABEL_COLUMN}` is reserved")));
        }
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} values for {} features",
                    row.len(),
                    feature_names.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Format(format!("non-finite value in row {i}, column `{}`", feature_names[j])));
            }
        }
        if let Some(l) = labels.iter().find(|&&l| l > 10) {
            return Err(Error::Format(format!("label {l} outside 0..=10")));
        }
        Ok(Self {
            feature_names,
            rows,
            labels,
            image_id: image_id.into(),
            ksize,
        })
    }

    pub fn from_slice(slice: FeatureSlice, labels: Vec<u8>, image_id: impl Into<String>, ksize: usize) -> Result<Self> {
        let names = slice.names().to_vec();
        Self::new(names, slice.into_rows(), labels, image_id, ksize)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Column-major copy of the values.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.n_features())
            .map(|j| self.rows.iter().map(|r| r[j]).collect())
            .collect()
    }

    /// Header of feature names plus a final `label` column. Values use the
    /// shortest representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Format(format!("csv write: {e}"));
        w.write_record(self.feature_names.iter().map(String::as_str).chain([LABEL_COLUMN]))
            .map_err(csv_err)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            w.write_record(row.iter().map(|v| v.to_string()).chain([label.to_string()]))
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Format(format!("csv flush: {e}")))
    }

    pub fn read_csv<R: Read>(input: R, image_id: impl Into<String>, ksize: usize) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let csv_err = |e: csv::Error| Error::Format(format!("csv read: {e}"));
        let header = r.headers().map_err(csv_err)?.clone();
        let (last, names) = header
            .iter()
            .collect::<Vec<_>>()
            .split_last()
            .map(|(l, n)| (l.to_string(), n.iter().map(|s| s.to_string()).collect::<Vec<_>>()))
            .ok_or_else(|| Error::Format("empty csv header".into()))?;
        if last != LABEL_COLUMN {
            return Err(Error::Format(format!("last column is `{last}`, expected `{LABEL_COLUMN}`")));
        }
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Format(format!("row {i}: `{s}`: {e}")));
            let mut values = rec.iter().map(parse).collect::<Result<Vec<_>>>()?;
            let label = values.pop().ok_or_else(|| Error::Format(format!("row {i} is empty")))?;
            if label.fract() != 0.0 || !(0.0..=10.0).contains(&label) {
                return Err(Error::Format(format!("row {i}: label {label} is not a decile")));
            }
            labels.push(label as u8);
            rows.push(values);
        }
        Self::new(names, rows, labels, image_id, ksize)
    }
}
