use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::dataset::DatasetManifest;
use super::extract::{feature_csv_path, ImageOutcome, RunManifest};
use super::{read_json, write_file, write_json, RunSummary};
use crate::error::{Error, Result};
use crate::selection::{
    aggregate_importances, feature_importances, fit_forest, importance_records, rank_features, FeatureMatrix,
    GroupBy, ImportanceRecord, QuartileSummary, RankedFeature,
};

pub const IMPORTANCE_CSV: &str = "importance.csv";
pub const SUMMARY_KSIZE: &str = "summary_ksize.json";
pub const SUMMARY_FAMILY: &str = "summary_family.json";
pub const TOP_FEATURES: &str = "top_features.json";
pub const RANK_MANIFEST: &str = "rank_manifest.json";
pub const TOP_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsizeSummaries {
    pub ksize: usize,
    pub summaries: Vec<QuartileSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    /// Across every (image, ksize) forest.
    pub pooled: Vec<QuartileSummary>,
    pub by_ksize: Vec<KsizeSummaries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsizeTop {
    pub ksize: usize,
    pub features: Vec<RankedFeature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopFeatures {
    pub top_k: usize,
    pub overall: Vec<RankedFeature>,
    pub by_ksize: Vec<KsizeTop>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestOutcome {
    pub image_id: String,
    pub ksize: usize,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

enum Fitted {
    Records(Vec<ImportanceRecord>),
    Excluded,
}

fn rank_one(config: &PipelineConfig, image_id: &str, ksize: usize) -> Result<Fitted> {
    let path = feature_csv_path(&config.output_dir, image_id, ksize);
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let matrix = FeatureMatrix::read_csv(file, image_id, ksize)?;
    match fit_forest(&matrix, &config.forest_config()) {
        Ok(model) => {
            let imp = feature_importances(&model);
            Ok(Fitted::Records(importance_records(matrix.feature_names(), &imp, image_id, ksize)?))
        }
        Err(Error::DegenerateTarget) => Ok(Fitted::Excluded),
        Err(e) => Err(e),
    }
}

fn per_ksize<T>(
    records: &[ImportanceRecord],
    ksizes: &[usize],
    f: impl Fn(&[ImportanceRecord]) -> Result<T>,
) -> Result<Vec<(usize, T)>> {
    ksizes
        .iter()
        .filter_map(|&k| {
            let subset: Vec<ImportanceRecord> = records.iter().filter(|r| r.ksize == k).cloned().collect();
            (!subset.is_empty()).then(|| f(&subset).map(|v| (k, v)))
        })
        .collect()
}

fn write_importance_csv(path: &Path, records: &[ImportanceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Format(format!("csv write: {e}"));
    w.write_record(["feature_name", "family", "ksize", "image_id", "importance"])
        .map_err(err)?;
    for r in records {
        w.write_record([
            r.feature_name.as_str(),
            r.family.as_str(),
            &r.ksize.to_string(),
            &r.image_id,
            &r.importance.to_string(),
        ])
        .map_err(err)?;
    }
    let buf = w.into_inner().map_err(|e| Error::Format(format!("csv write: {e}")))?;
    write_file(path, &buf)
}

/// Fits one forest per (image, ksize) from the extraction CSVs and writes the
/// importance table, grouped summaries and top features. Never reads pixels.
pub fn run_rank(config: &PipelineConfig) -> Result<RunSummary> {
    config.validate()?;
    let dataset = DatasetManifest::load(&config.dataset)?;
    let jobs: Vec<(&str, usize)> = dataset
        .images
        .iter()
        .flat_map(|e| config.ksizes.iter().map(move |&k| (e.id.as_str(), k)))
        .collect();
    let results: Vec<Result<Fitted>> = jobs.par_iter().map(|&(id, k)| rank_one(config, id, k)).collect();

    let mut records = Vec::new();
    let mut forests = Vec::new();
    let mut image_ok = vec![true; dataset.images.len()];
    let mut image_err: Vec<Option<String>> = vec![None; dataset.images.len()];
    for (i, ((id, k), res)) in jobs.iter().zip(results).enumerate() {
        let image_idx = i / config.ksizes.len();
        let (status, error) = match res {
            Ok(Fitted::Records(r)) => {
                records.extend(r);
                ("ok", None)
            }
            Ok(Fitted::Excluded) => {
                warn!("{id} k={k}: single target class, excluded from aggregation");
                ("excluded", None)
            }
            Err(e) => {
                warn!("{id} k={k}: {e}");
                image_ok[image_idx] = false;
                image_err[image_idx].get_or_insert_with(|| e.to_string());
                ("failed", Some(e.to_string()))
            }
        };
        forests.push(ForestOutcome {
            image_id: id.to_string(),
            ksize: *k,
            status: status.into(),
            error,
        });
    }

    let out = &config.output_dir;
    write_importance_csv(&out.join(IMPORTANCE_CSV), &records)?;

    let (by_ksize, family, top) = if records.is_empty() {
        warn!("no forest could be fitted; summaries are empty");
        (
            Vec::new(),
            FamilySummary {
                pooled: Vec::new(),
                by_ksize: Vec::new(),
            },
            TopFeatures {
                top_k: TOP_K,
                overall: Vec::new(),
                by_ksize: Vec::new(),
            },
        )
    } else {
        let by_ksize = aggregate_importances(&records, GroupBy::Ksize)?;
        let family = FamilySummary {
            pooled: aggregate_importances(&records, GroupBy::Family)?,
            by_ksize: per_ksize(&records, &config.ksizes, |r| aggregate_importances(r, GroupBy::Family))?
                .into_iter()
                .map(|(ksize, summaries)| KsizeSummaries { ksize, summaries })
                .collect(),
        };
        let top = TopFeatures {
            top_k: TOP_K,
            overall: rank_features(&records)?.top(TOP_K).to_vec(),
            by_ksize: per_ksize(&records, &config.ksizes, |r| Ok(rank_features(r)?.top(TOP_K).to_vec()))?
                .into_iter()
                .map(|(ksize, features)| KsizeTop { ksize, features })
                .collect(),
        };
        (by_ksize, family, top)
    };
    write_json(&out.join(SUMMARY_KSIZE), &by_ksize)?;
    write_json(&out.join(SUMMARY_FAMILY), &family)?;
    write_json(&out.join(TOP_FEATURES), &top)?;

    let outcomes: Vec<ImageOutcome> = dataset
        .images
        .iter()
        .zip(image_ok.iter().zip(image_err))
        .map(|(e, (&ok, error))| ImageOutcome {
            id: e.id.clone(),
            ok,
            error,
        })
        .collect();
    let summary = RunSummary::from_outcomes(&outcomes);
    #[derive(Serialize)]
    struct RankManifest {
        #[serde(flatten)]
        run: RunManifest,
        forest: crate::selection::ForestConfig,
        forests: Vec<ForestOutcome>,
    }
    write_json(
        &out.join(RANK_MANIFEST),
        &RankManifest {
            run: RunManifest::new(config, outcomes),
            forest: config.forest_config(),
            forests,
        },
    )?;
    Ok(summary)
}

/// Plain-text digest of a finished `rank` run.
pub fn render_report(output_dir: &Path) -> Result<String> {
    let top: TopFeatures = read_json(&output_dir.join(TOP_FEATURES))?;
    let family: FamilySummary = read_json(&output_dir.join(SUMMARY_FAMILY))?;
    let ksize: Vec<QuartileSummary> = read_json(&output_dir.join(SUMMARY_KSIZE))?;

    let mut s = String::new();
    let row = |s: &mut String, q: &QuartileSummary| {
        let _ = writeln!(
            s,
            "  {:<28} n={:<5} min={:.3e} q1={:.3e} med={:.3e} q3={:.3e} max={:.3e}",
            q.group, q.count, q.min, q.lower_hinge, q.median, q.upper_hinge, q.max
        );
    };
    let _ = writeln!(s, "Top {} features (median importance across forests):", top.top_k);
    for (i, f) in top.overall.iter().enumerate() {
        let _ = writeln!(
            s,
            "  {}. {:<28} {:<8} {:.6}",
            i + 1,
            f.feature_name,
            f.family.as_str(),
            f.median_importance
        );
    }
    for t in &top.by_ksize {
        let names: Vec<&str> = t.features.iter().map(|f| f.feature_name.as_str()).collect();
        let _ = writeln!(s, "  k={:<3} {}", t.ksize, names.join(", "));
    }
    let _ = writeln!(s, "\nSummed importance per family:");
    family.pooled.iter().for_each(|q| row(&mut s, q));
    let _ = writeln!(s, "\nPer-feature importance by ksize:");
    ksize.iter().for_each(|q| row(&mut s, q));
    Ok(s)
}
