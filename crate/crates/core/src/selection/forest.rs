//! CART classification trees with Gini splitting, bagged into a random forest.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gini::gini_from_counts;
use super::matrix::FeatureMatrix;
use crate::error::{Error, Result};

/// How decile labels become class indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetRule {
    /// Class 1 when `decile >= threshold`, else 0.
    Binary { threshold: u8 },
    /// Each decile 0..=10 is its own class.
    Deciles,
}

impl Default for TargetRule {
    fn default() -> Self {
        TargetRule::Binary { threshold: 5 }
    }
}

impl TargetRule {
    pub fn n_classes(self) -> usize {
        match self {
            TargetRule::Binary { .. } => 2,
            TargetRule::Deciles => 11,
        }
    }

    pub fn class_of(self, decile: u8) -> usize {
        match self {
            TargetRule::Binary { threshold } => usize::from(decile >= threshold),
            TargetRule::Deciles => decile as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturesPerSplit {
    /// `round(sqrt F)`, at least 1.
    Sqrt,
    All,
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, n_features: usize) -> usize {
        let m = match self {
            FeaturesPerSplit::Sqrt => (n_features as f64).sqrt().round() as usize,
            FeaturesPerSplit::All => n_features,
            FeaturesPerSplit::Count(c) => c,
        };
        m.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: FeaturesPerSplit,
    pub bootstrap: bool,
    pub seed: u64,
    pub target_rule: TargetRule,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: FeaturesPerSplit::Sqrt,
            bootstrap: true,
            seed: 0,
            target_rule: TargetRule::default(),
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParams("n_trees must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidParams("min_samples_split must be >= 2".into()));
        }
        if matches!(self.features_per_split, FeaturesPerSplit::Count(0)) {
            return Err(Error::InvalidParams("features_per_split must be >= 1".into()));
        }
        if let TargetRule::Binary { threshold } = self.target_rule {
            if threshold == 0 || threshold > 10 {
                return Err(Error::InvalidParams(format!("binary threshold {threshold} not in 1..=10")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        /// Samples with `x[feature] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
        /// Gini impurity of this node.
        impurity: f64,
        /// Share of the tree's training samples reaching this node.
        fraction: f64,
        /// Impurity decrease of the split.
        gain: f64,
    },
    Leaf {
        /// Class proportions.
        distribution: Vec<f64>,
        fraction: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Root at index 0.
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn predict_proba(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[*feature] <= *threshold { *left } else { *right },
                TreeNode::Leaf { distribution, .. } => return distribution,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub n_features: usize,
    pub n_classes: usize,
}

impl ForestModel {
    /// Class with the highest mean tree probability; ties go to the lower class.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut mean = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (m, p) in mean.iter_mut().zip(t.predict_proba(x)) {
                *m += p;
            }
        }
        let mut best = 0;
        for (c, &v) in mean.iter().enumerate() {
            if v > mean[best] {
                best = c;
            }
        }
        best
    }
}

struct TreeBuilder<'a> {
    columns: &'a [Vec<f64>],
    classes: &'a [usize],
    n_classes: usize,
    config: &'a ForestConfig,
    mtry: usize,
    /// Position of each feature in name order, for tie-breaking.
    name_rank: &'a [usize],
    total: f64,
    nodes: Vec<TreeNode>,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl TreeBuilder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.n_classes];
        for &i in idx {
            c[self.classes[i]] += 1.0;
        }
        c
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let id = self.nodes.len();
        let n = idx.len() as f64;
        let counts = self.counts(&idx);
        let impurity = gini_from_counts(&counts, n);
        let fraction = n / self.total;
        let leaf = |counts: Vec<f64>| TreeNode::Leaf {
            distribution: counts.iter().map(|c| c / n).collect(),
            fraction,
        };
        let stop = impurity <= 0.0
            || idx.len() < self.config.min_samples_split
            || self.config.max_depth.is_some_and(|d| depth >= d);
        if stop {
            self.nodes.push(leaf(counts));
            return id;
        }
        let Some(split) = self.best_split(&idx, &counts, impurity, rng) else {
            self.nodes.push(leaf(counts));
            return id;
        };
        let col = &self.columns[split.feature];
        let (li, ri): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| col[i] <= split.threshold);
        self.nodes.push(TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
            impurity,
            fraction,
            gain: split.gain,
        });
        let l = self.build(li, depth + 1, rng);
        let r = self.build(ri, depth + 1, rng);
        if let TreeNode::Split { left, right, .. } = &mut self.nodes[id] {
            *left = l;
            *right = r;
        }
        id
    }

    /// Highest impurity decrease over the sampled features; ties keep the
    /// feature whose name sorts first, then the lowest threshold.
    fn best_split(&self, idx: &[usize], counts: &[f64], impurity: f64, rng: &mut ChaCha8Rng) -> Option<Split> {
        let n_features = self.columns.len();
        let mut features: Vec<usize> = if self.mtry >= n_features {
            (0..n_features).collect()
        } else {
            sample(rng, n_features, self.mtry).into_vec()
        };
        features.sort_unstable();

        let n = idx.len() as f64;
        let mut best: Option<Split> = None;
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        let mut left = vec![0.0; self.n_classes];
        for f in features {
            let col = &self.columns[f];
            order.clear();
            order.extend(idx.iter().map(|&i| (col[i], self.classes[i])));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            left.iter_mut().for_each(|c| *c = 0.0);
            for pos in 0..order.len() - 1 {
                left[order[pos].1] += 1.0;
                let (lo, hi) = (order[pos].0, order[pos + 1].0);
                if lo == hi {
                    continue;
                }
                let nl = (pos + 1) as f64;
                let nr = n - nl;
                let right: Vec<f64> = counts.iter().zip(&left).map(|(c, l)| c - l).collect();
                let gain = impurity - (nl / n) * gini_from_counts(&left, nl) - (nr / n) * gini_from_counts(&right, nr);
                let better = best.as_ref().is_none_or(|b| {
                    gain > b.gain || (gain == b.gain && self.name_rank[f] < self.name_rank[b.feature])
                });
                if gain > f64::EPSILON && better {
                    let mid = lo + (hi - lo) / 2.0;
                    best = Some(Split {
                        feature: f,
                        threshold: if mid < hi { mid } else { lo },
                        gain,
                    });
                }
            }
        }
        best
    }
}

/// Fits `n_trees` trees, each from its own ChaCha8 stream so results do not
/// depend on scheduling.
pub fn fit_forest(matrix: &FeatureMatrix, config: &ForestConfig) -> Result<ForestModel> {
    config.validate()?;
    if matrix.n_rows() == 0 || matrix.n_features() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let rule = config.target_rule;
    let classes: Vec<usize> = matrix.labels().iter().map(|&l| rule.class_of(l)).collect();
    if classes.iter().all(|&c| c == classes[0]) {
        return Err(Error::DegenerateTarget);
    }
    let columns = matrix.columns();
    let n = matrix.n_rows();
    let mtry = config.features_per_split.resolve(matrix.n_features());
    let mut by_name: Vec<usize> = (0..matrix.n_features()).collect();
    by_name.sort_by(|&a, &b| matrix.feature_names()[a].cmp(&matrix.feature_names()[b]));
    let mut name_rank = vec![0; by_name.len()];
    for (rank, &f) in by_name.iter().enumerate() {
        name_rank[f] = rank;
    }
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t as u64);
            let idx: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut b = TreeBuilder {
                columns: &columns,
                classes: &classes,
                n_classes: rule.n_classes(),
                config,
                mtry,
                name_rank: &name_rank,
                total: n as f64,
                nodes: Vec::new(),
            };
            b.build(idx, 0, &mut rng);
            DecisionTree { nodes: b.nodes }
        })
        .collect();
    Ok(ForestModel {
        trees,
        n_features: matrix.n_features(),
        n_classes: rule.n_classes(),
    })
}

/// Sum over every split node of `fraction * gain`, per feature, normalized to 1.
pub fn feature_importances(model: &ForestModel) -> Vec<f64> {
    let mut imp = vec![0.0; model.n_features];
    for tree in &model.trees {
        for node in &tree.nodes {
            if let TreeNode::Split {
                feature, fraction, gain, ..
            } = node
            {
                imp[*feature] += fraction * gain;
            }
        }
    }
    let total: f64 = imp.iter().sum();
    if total > 0.0 {
        imp.iter_mut().for_each(|v| *v /= total);
    }
    imp
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn stump(feature: usize, gain: f64) -> DecisionTree {
        DecisionTree {
            nodes: vec![
                TreeNode::Split {
                    feature,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                    impurity: 0.5,
                    fraction: 1.0,
                    gain,
                },
                TreeNode::Leaf {
                    distribution: vec![1.0, 0.0],
                    fraction: 0.5,
                },
                TreeNode::Leaf {
                    distribution: vec![0.0, 1.0],
                    fraction: 0.5,
                },
            ],
        }
    }

    #[test]
    fn hand_built_stumps() {
        let one = ForestModel {
            trees: vec![stump(2, 0.3)],
            n_features: 4,
            n_classes: 2,
        };
        assert_eq!(feature_importances(&one), vec![0.0, 0.0, 1.0, 0.0]);
        let two = ForestModel {
            trees: vec![stump(0, 0.25), stump(1, 0.25)],
            n_features: 2,
            n_classes: 2,
        };
        assert_eq!(feature_importances(&two), vec![0.5, 0.5]);
        assert_eq!(two.predict(&[0.0, 0.0]), 0);
        assert_eq!(two.predict(&[1.0, 1.0]), 1);
    }

    fn separable_dataset(n: usize, noise: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut names: Vec<String> = (0..noise).map(|i| format!("noise{i}")).collect();
        names.insert(3, "signal".into());
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let label = if i % 2 == 0 { 9 } else { 1 };
            let mut row: Vec<f64> = (0..noise).map(|_| rng.random::<f64>()).collect();
            row.insert(3, if label >= 5 { 1.0 } else { 0.0 } + 0.1 * rng.random::<f64>());
            rows.push(row);
            labels.push(label);
        }
        FeatureMatrix::new(names, rows, labels, "syn", 5).unwrap()
    }

    #[test]
    fn separating_feature_wins() {
        let m = separable_dataset(200, 10, 1);
        let imp = feature_importances(&fit_forest(&m, &ForestConfig::default()).unwrap());
        let best = imp.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(best, 3);
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn single_split_oracle() {
        // 10 rows, one feature, labels split 4 | 6 by x; a depth-1 tree without bootstrap
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let labels: Vec<u8> = (0..10).map(|i| if i < 4 { 0 } else { 10 }).collect();
        let m = FeatureMatrix::new(vec!["x".into()], rows, labels, "s", 5).unwrap();
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: Some(1),
            bootstrap: false,
            ..ForestConfig::default()
        };
        let model = fit_forest(&m, &cfg).unwrap();
        let TreeNode::Split {
            threshold,
            gain,
            impurity,
            fraction,
            ..
        } = model.trees[0].nodes[0]
        else {
            panic!("root is a leaf");
        };
        assert_eq!(threshold, 3.5);
        assert_eq!(fraction, 1.0);
        let parent = 1.0 - 0.4f64.powi(2) - 0.6f64.powi(2);
        assert!((impurity - parent).abs() < 1e-12);
        assert!((gain - parent).abs() < 1e-12);
    }

    #[test]
    fn degenerate_and_empty() {
        let m = FeatureMatrix::new(vec!["x".into()], vec![vec![1.0], vec![2.0]], vec![7, 9], "d", 5).unwrap();
        assert!(matches!(fit_forest(&m, &ForestConfig::default()), Err(Error::DegenerateTarget)));
        let e = FeatureMatrix::new(vec!["x".into()], vec![], vec![], "d", 5).unwrap();
        assert!(matches!(fit_forest(&e, &ForestConfig::default()), Err(Error::EmptyMatrix)));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let m = separable_dataset(120, 8, 4);
        let cfg = ForestConfig {
            n_trees: 30,
            seed: 77,
            ..ForestConfig::default()
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| fit_forest(&m, &cfg).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        let ia = feature_importances(&a);
        let ib = feature_importances(&b);
        assert!(ia.iter().zip(&ib).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn depth_limit_respected() {
        let m = separable_dataset(100, 5, 2);
        let cfg = ForestConfig {
            n_trees: 5,
            max_depth: Some(2),
            ..ForestConfig::default()
        };
        assert!(fit_forest(&m, &cfg).unwrap().trees.iter().all(|t| t.depth() <= 2));
    }

    #[test]
    fn eleven_class_mode() {
        let rows: Vec<Vec<f64>> = (0..22).map(|i| vec![(i % 11) as f64]).collect();
        let labels: Vec<u8> = (0..22).map(|i| (i % 11) as u8).collect();
        let m = FeatureMatrix::new(vec!["x".into()], rows, labels, "d", 5).unwrap();
        let cfg = ForestConfig {
            n_trees: 3,
            target_rule: TargetRule::Deciles,
            bootstrap: false,
            ..ForestConfig::default()
        };
        let model = fit_forest(&m, &cfg).unwrap();
        assert_eq!(model.n_classes, 11);
        for d in 0..11 {
            assert_eq!(model.predict(&[d as f64]), d);
        }
    }

    fn random_matrix(seed: u64, n: usize, f: usize) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..f).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
        let labels = rows
            .iter()
            .map(|r| if r[0] + 0.5 * r[1 % f] + rng.random_range(-1.0..1.0) > 0.0 { 8 } else { 2 })
            .collect();
        let names = (0..f).map(|j| format!("f{j}")).collect();
        FeatureMatrix::new(names, rows, labels, "r", 5).unwrap()
    }

    fn structure(model: &ForestModel) -> Vec<Vec<(usize, u64)>> {
        model
            .trees
            .iter()
            .map(|t| {
                t.nodes
                    .iter()
                    .map(|n| match n {
                        TreeNode::Split { feature, gain, .. } => (*feature, gain.to_bits()),
                        TreeNode::Leaf { .. } => (usize::MAX, 0),
                    })
                    .collect()
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn monotone_transform_keeps_structure(seed in any::<u64>(), col in 0usize..4, kind in 0usize..3) {
            let m = random_matrix(seed, 60, 4);
            let t = |v: f64| match kind {
                0 => v.exp(),
                1 => 3.0 * v - 7.0,
                _ => v * v * v + v,
            };
            let rows = m.rows().iter().map(|r| {
                let mut r = r.clone();
                r[col] = t(r[col]);
                r
            }).collect();
            let mt = FeatureMatrix::new(m.feature_names().to_vec(), rows, m.labels().to_vec(), "r", 5).unwrap();
            let cfg = ForestConfig { n_trees: 8, seed, ..ForestConfig::default() };
            let a = fit_forest(&m, &cfg).unwrap();
            let b = fit_forest(&mt, &cfg).unwrap();
            prop_assert_eq!(structure(&a), structure(&b));
            prop_assert_eq!(feature_importances(&a), feature_importances(&b));
        }

        #[test]
        fn column_permutation_permutes_importances(seed in any::<u64>()) {
            let m = random_matrix(seed, 50, 5);
            let perm = [3usize, 0, 4, 1, 2];
            let rows = m.rows().iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
            let names = perm.iter().map(|&j| m.feature_names()[j].clone()).collect();
            let mp = FeatureMatrix::new(names, rows, m.labels().to_vec(), "r", 5).unwrap();
            let cfg = ForestConfig {
                n_trees: 6,
                seed,
                features_per_split: FeaturesPerSplit::All,
                ..ForestConfig::default()
            };
            let a = feature_importances(&fit_forest(&m, &cfg).unwrap());
            let b = feature_importances(&fit_forest(&mp, &cfg).unwrap());
            for (new, &old) in perm.iter().enumerate() {
                prop_assert!((b[new] - a[old]).abs() < 1e-12, "{:?} {:?}", a, b);
            }
        }

        #[test]
        fn importances_are_a_distribution(seed in any::<u64>()) {
            let m = random_matrix(seed, 40, 6);
            let cfg = ForestConfig { n_trees: 5, seed, ..ForestConfig::default() };
            let imp = feature_importances(&fit_forest(&m, &cfg).unwrap());
            prop_assert!(imp.iter().all(|&v| v >= 0.0));
            prop_assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
