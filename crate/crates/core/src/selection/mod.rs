//! Random-forest Gini importance and its aggregation across images and window sizes.

pub mod forest;
pub mod gini;
pub mod matrix;
pub mod quartiles;
pub mod report;

pub use forest::{
    feature_importances, fit_forest, DecisionTree, FeaturesPerSplit, ForestConfig, ForestModel, TargetRule, TreeNode,
};
pub use gini::{gini_gain, gini_impurity};
pub use matrix::FeatureMatrix;
pub use quartiles::{tukey_quartiles, QuartileSummary};
pub use report::{
    aggregate_importances, importance_records, rank_features, GroupBy, ImportanceRecord, RankedFeature, RankedReport,
};
