//! Importance records, grouped summaries and the ranked feature list.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::quartiles::{tukey_quartiles, QuartileSummary};
use crate::error::{Error, Result};
use crate::features::Family;

/// One feature's importance in one (image, ksize) forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRecord {
    pub feature_name: String,
    pub family: Family,
    pub ksize: usize,
    pub image_id: String,
    pub importance: f64,
}

pub fn importance_records(
    names: &[String],
    importances: &[f64],
    image_id: &str,
    ksize: usize,
) -> Result<Vec<ImportanceRecord>> {
    if names.len() != importances.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} importances",
            names.len(),
            importances.len()
        )));
    }
    names
        .iter()
        .zip(importances)
        .map(|(name, &importance)| {
            let family =
                Family::classify(name).ok_or_else(|| Error::Format(format!("feature `{name}` has no family")))?;
            Ok(ImportanceRecord {
                feature_name: name.clone(),
                family,
                ksize,
                image_id: image_id.to_string(),
                importance,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    /// Every per-feature value at that ksize.
    Ksize,
    /// Per (image, ksize), the family's summed importance.
    Family,
    /// Every per-feature value of that image.
    Image,
    /// The feature's value in each (image, ksize) forest.
    Feature,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Ksize(usize),
    Family(Family),
    Text(String),
}

impl Key {
    fn label(&self) -> String {
        match self {
            Key::Ksize(k) => k.to_string(),
            Key::Family(f) => f.as_str().to_string(),
            Key::Text(s) => s.clone(),
        }
    }
}

/// One summary per group, in ascending key order.
pub fn aggregate_importances(records: &[ImportanceRecord], group_by: GroupBy) -> Result<Vec<QuartileSummary>> {
    if records.is_empty() {
        return Err(Error::EmptyGroup(format!("{group_by:?}").to_lowercase()));
    }
    let mut groups: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    match group_by {
        GroupBy::Family => {
            let mut sums: BTreeMap<(Family, &str, usize), f64> = BTreeMap::new();
            for r in records {
                *sums.entry((r.family, &r.image_id, r.ksize)).or_default() += r.importance;
            }
            for ((family, _, _), v) in sums {
                groups.entry(Key::Family(family)).or_default().push(v);
            }
        }
        _ => {
            for r in records {
                let key = match group_by {
                    GroupBy::Ksize => Key::Ksize(r.ksize),
                    GroupBy::Image => Key::Text(r.image_id.clone()),
                    _ => Key::Text(r.feature_name.clone()),
                };
                groups.entry(key).or_default().push(r.importance);
            }
        }
    }
    groups
        .into_iter()
        .map(|(k, v)| tukey_quartiles(k.label(), &v))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub feature_name: String,
    pub family: Family,
    pub median_importance: f64,
    pub summary: QuartileSummary,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RankedReport {
    pub features: Vec<RankedFeature>,
}

impl RankedReport {
    pub fn top(&self, k: usize) -> &[RankedFeature] {
        &self.features[..k.min(self.features.len())]
    }

    /// How many of the first `k` features belong to `family`.
    pub fn family_count_in_top(&self, k: usize, family: Family) -> usize {
        self.top(k).iter().filter(|f| f.family == family).count()
    }
}

/// Features by descending median importance across forests; ties by name.
pub fn rank_features(records: &[ImportanceRecord]) -> Result<RankedReport> {
    let families: BTreeMap<&str, Family> = records.iter().map(|r| (r.feature_name.as_str(), r.family)).collect();
    let mut features: Vec<RankedFeature> = aggregate_importances(records, GroupBy::Feature)?
        .into_iter()
        .map(|summary| RankedFeature {
            family: families[summary.group.as_str()],
            feature_name: summary.group.clone(),
            median_importance: summary.median,
            summary,
        })
        .collect();
    features.sort_by(|a, b| {
        b.median_importance
            .total_cmp(&a.median_importance)
            .then_with(|| a.feature_name.cmp(&b.feature_name))
    });
    Ok(RankedReport { features })
}
