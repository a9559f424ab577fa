//! Five-number summaries with Tukey hinges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuartileSummary {
    pub group: String,
    pub count: usize,
    pub min: f64,
    pub lower_hinge: f64,
    pub median: f64,
    pub upper_hinge: f64,
    pub max: f64,
}

fn lower_middle(sorted: &[f64]) -> Option<f64> {
    (!sorted.is_empty()).then(|| sorted[(sorted.len() - 1) / 2])
}

/// Median is the lower-middle element; hinges are the lower-middle elements
/// of the values strictly below and above the median position. An empty half
/// collapses its hinge onto the median.
pub fn tukey_quartiles(group: impl Into<String>, values: &[f64]) -> Result<QuartileSummary> {
    let group = group.into();
    if values.is_empty() {
        return Err(Error::EmptyGroup(group));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParams(format!("non-finite value {v} in group `{group}`")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = (sorted.len() - 1) / 2;
    let median = sorted[m];
    Ok(QuartileSummary {
        count: sorted.len(),
        min: sorted[0],
        lower_hinge: lower_middle(&sorted[..m]).unwrap_or(median),
        median,
        upper_hinge: lower_middle(&sorted[m + 1..]).unwrap_or(median),
        max: sorted[sorted.len() - 1],
        group,
    })
}
