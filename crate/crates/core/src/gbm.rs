//! Gradient boosted regression trees with logistic loss.
//!
//! Each boosting stage fits a depth-limited least-squares tree to the
//! residuals `y - sigmoid(F)`, replaces every leaf by the Newton step
//! `sum(r) / sum(p * (1 - p))` (clamped to `±LEAF_CLAMP`), and adds the tree
//! to the ensemble scaled by the learning rate.
//!
//! Split search is exact: every midpoint between consecutive distinct values
//! of every feature is evaluated. Gains within a relative `GAIN_TIE` of each
//! other count as tied, and ties go to the lowest feature index, then the
//! lowest threshold. Training samples are put in a canonical order before
//! fitting, so the model does not depend on the order they were given in.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Leaf values are clamped to this magnitude.
pub const LEAF_CLAMP: f64 = 4.0;
/// Log-odds used for single-class training data.
pub const DEGENERATE_LOGIT: f64 = 15.0;
/// Raw scores are clamped here before the sigmoid so predictions stay
/// strictly inside `(0, 1)`.
pub const LOGIT_LIMIT: f64 = 30.0;
/// Smallest variance reduction accepted for a split.
pub const MIN_GAIN: f64 = 1e-12;
/// Relative gain difference below which two candidate splits are tied. It
/// keeps the choice independent of floating-point summation order.
pub const GAIN_TIE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GbmConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbmConfig {
    fn default() -> Self {
        Self {
            n_trees: 400,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 20,
            subsample: 1.0,
            seed: 0,
        }
    }
}

impl GbmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::Config("min_samples_leaf must be at least 1".into()));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::Config("subsample must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A binary regression tree stored as a flat node table rooted at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    /// Validates a node table: children must come after their parent (which
    /// rules out cycles), every node must be reachable exactly once and every
    /// value finite.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::ModelFormat("tree without nodes".into()));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            match *node {
                Node::Split {
                    threshold, left, right, ..
                } => {
                    if !threshold.is_finite() {
                        return Err(Error::ModelFormat(format!("node {id}: non-finite threshold")));
                    }
                    for child in [left, right] {
                        if child <= id || child >= nodes.len() {
                            return Err(Error::ModelFormat(format!("node {id}: bad child {child}")));
                        }
                        parents[child] += 1;
                    }
                }
                Node::Leaf { value } => {
                    if !value.is_finite() {
                        return Err(Error::ModelFormat(format!("node {id}: non-finite leaf")));
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::ModelFormat("node table is not a tree".into()));
        }
        Ok(Self { nodes })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &RegressionTree, id: usize) -> usize {
            match t.nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbmModel {
    /// Initial log-odds.
    pub base_score: f64,
    pub learning_rate: f64,
    pub feature_count: usize,
    pub trees: Vec<RegressionTree>,
}

pub fn sigmoid(z: f64) -> f64 {
    let z = z.clamp(-LOGIT_LIMIT, LOGIT_LIMIT);
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-sample logistic loss for raw score `f` and label `y`.
pub fn log_loss(f: f64, y: bool) -> f64 {
    let softplus = f.max(0.0) + (-f.abs()).exp().ln_1p();
    if y {
        softplus - f
    } else {
        softplus
    }
}

impl GbmModel {
    pub fn new(base_score: f64, learning_rate: f64, feature_count: usize, trees: Vec<RegressionTree>) -> Result<Self> {
        if !base_score.is_finite() || !learning_rate.is_finite() {
            return Err(Error::ModelFormat("non-finite model header".into()));
        }
        for (t, tree) in trees.iter().enumerate() {
            if let Some(f) = tree.max_feature() {
                if f >= feature_count {
                    return Err(Error::ModelFormat(format!(
                        "tree {t} uses feature {f} but the model has {feature_count}"
                    )));
                }
            }
        }
        Ok(Self {
            base_score,
            learning_rate,
            feature_count,
            trees,
        })
    }

    /// A model without trees that predicts `sigmoid(base_score)`.
    pub fn constant(base_score: f64, feature_count: usize) -> Self {
        Self {
            base_score,
            learning_rate: GbmConfig::default().learning_rate,
            feature_count,
            trees: Vec::new(),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_count {
            return Err(Error::DimensionMismatch {
                expected: self.feature_count,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Additive score in log-odds space.
    pub fn raw_score(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let mut f = self.base_score;
        for tree in &self.trees {
            f += self.learning_rate * tree.predict(x);
        }
        Ok(f)
    }

    /// Match probability, strictly inside `(0, 1)`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.raw_score(x).map(sigmoid)
    }
}

/// Labeled feature vectors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Samples {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl Samples {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        Ok(Self { rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn dim(&self) -> Result<usize> {
        let dim = self.rows.first().map_or(0, Vec::len);
        for row in &self.rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite feature value".into()));
            }
        }
        Ok(dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub model: GbmModel,
    /// Mean training log-loss before any tree and after every stage.
    pub stage_log_loss: Vec<f64>,
    /// Set when the training labels were all one class.
    pub degenerate: bool,
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

struct Fitter<'a> {
    columns: &'a [Vec<f64>],
    /// Per feature, sample indices sorted by value (then index).
    sorted: &'a [Vec<usize>],
    residual: &'a [f64],
    hessian: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    member: Vec<bool>,
    nodes: Vec<Node>,
}

impl Fitter<'_> {
    fn leaf_value(&self, members: &[usize]) -> f64 {
        let g: f64 = members.iter().map(|&i| self.residual[i]).sum();
        let h: f64 = members.iter().map(|&i| self.hessian[i]).sum();
        if h <= f64::MIN_POSITIVE {
            return 0.0;
        }
        (g / h).clamp(-LEAF_CLAMP, LEAF_CLAMP)
    }

    fn best_split(&mut self, members: &[usize]) -> Option<(usize, f64)> {
        let n = members.len();
        if n < 2 * self.min_leaf {
            return None;
        }
        for &i in members {
            self.member[i] = true;
        }
        let total: f64 = members.iter().map(|&i| self.residual[i]).sum();
        let parent = total * total / n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut ordered = Vec::with_capacity(n);
        for (f, order) in self.sorted.iter().enumerate() {
            ordered.clear();
            ordered.extend(order.iter().copied().filter(|&i| self.member[i]));
            let col = &self.columns[f];
            let mut left = 0.0;
            for k in 0..n - 1 {
                left += self.residual[ordered[k]];
                let (lo, hi) = (col[ordered[k]], col[ordered[k + 1]]);
                let n_left = k + 1;
                if lo == hi || n_left < self.min_leaf || n - n_left < self.min_leaf {
                    continue;
                }
                let right = total - left;
                let gain = left * left / n_left as f64 + right * right / (n - n_left) as f64 - parent;
                if gain > MIN_GAIN && best.is_none_or(|(g, _, _)| gain > g + GAIN_TIE * g) {
                    best = Some((gain, f, midpoint(lo, hi)));
                }
            }
        }
        for &i in members {
            self.member[i] = false;
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, members: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let split = if depth < self.max_depth {
            self.best_split(&members)
        } else {
            None
        };
        match split {
            None => {
                self.nodes[id] = Node::Leaf {
                    value: self.leaf_value(&members),
                };
            }
            Some((feature, threshold)) => {
                let col = &self.columns[feature];
                let (l, r): (Vec<usize>, Vec<usize>) = members.iter().partition(|&&i| col[i] <= threshold);
                let left = self.grow(l, depth + 1);
                let right = self.grow(r, depth + 1);
                self.nodes[id] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
        }
        id
    }
}

/// Split point strictly between `lo < hi`, so `lo` goes left and `hi` right.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

pub fn train(samples: &Samples, cfg: &GbmConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if samples.len() < 2 {
        return Err(Error::InvalidInput("training needs at least 2 samples".into()));
    }
    let dim = samples.dim()?;
    let n = samples.len();

    // Canonical order makes the model independent of the input order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        lexicographic(&samples.rows[a], &samples.rows[b]).then(samples.labels[a].cmp(&samples.labels[b]))
    });
    let labels: Vec<bool> = order.iter().map(|&i| samples.labels[i]).collect();
    let columns: Vec<Vec<f64>> = (0..dim)
        .map(|f| order.iter().map(|&i| samples.rows[i][f]).collect())
        .collect();

    let positives = labels.iter().filter(|&&y| y).count();
    if positives == 0 || positives == n {
        let base = if positives == n {
            DEGENERATE_LOGIT
        } else {
            -DEGENERATE_LOGIT
        };
        let loss = labels.iter().map(|&y| log_loss(base, y)).sum::<f64>() / n as f64;
        return Ok(TrainReport {
            model: GbmModel {
                base_score: base,
                learning_rate: cfg.learning_rate,
                feature_count: dim,
                trees: Vec::new(),
            },
            stage_log_loss: vec![loss],
            degenerate: true,
        });
    }
    let p = positives as f64 / n as f64;
    let base = (p / (1.0 - p)).ln();

    let sorted: Vec<Vec<usize>> = columns
        .iter()
        .map(|col| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            idx
        })
        .collect();

    let mut raw = vec![base; n];
    let mean_loss = |raw: &[f64]| raw.iter().zip(&labels).map(|(&f, &y)| log_loss(f, y)).sum::<f64>() / n as f64;
    let mut stage_log_loss = vec![mean_loss(&raw)];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut residual = vec![0.0; n];
    let mut hessian = vec![0.0; n];
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let row = |i: usize| -> Vec<f64> { columns.iter().map(|c| c[i]).collect() };
    let rows: Vec<Vec<f64>> = (0..n).map(row).collect();

    for _ in 0..cfg.n_trees {
        for i in 0..n {
            let prob = sigmoid(raw[i]);
            residual[i] = f64::from(u8::from(labels[i])) - prob;
            hessian[i] = prob * (1.0 - prob);
        }
        let members: Vec<usize> = if cfg.subsample < 1.0 {
            let k = ((cfg.subsample * n as f64).floor() as usize).max(1);
            let mut picked = index::sample(&mut rng, n, k).into_vec();
            picked.sort_unstable();
            picked
        } else {
            (0..n).collect()
        };
        let mut fitter = Fitter {
            columns: &columns,
            sorted: &sorted,
            residual: &residual,
            hessian: &hessian,
            max_depth: cfg.max_depth,
            min_leaf: cfg.min_samples_leaf,
            member: vec![false; n],
            nodes: Vec::new(),
        };
        fitter.grow(members, 0);
        let tree = RegressionTree { nodes: fitter.nodes };
        for (f, x) in raw.iter_mut().zip(&rows) {
            *f += cfg.learning_rate * tree.predict(x);
        }
        stage_log_loss.push(mean_loss(&raw));
        trees.push(tree);
    }

    Ok(TrainReport {
        model: GbmModel {
            base_score: base,
            learning_rate: cfg.learning_rate,
            feature_count: dim,
            trees,
        },
        stage_log_loss,
        degenerate: false,
    })
}

/// Leave-one-group-out predictions: each group is scored by a model trained
/// on all the other groups. Output rows line up with the input groups.
pub fn cross_val_predict(groups: &[Samples], cfg: &GbmConfig) -> Result<Vec<Vec<f64>>> {
    if groups.len() < 2 {
        return Err(Error::InvalidInput("cross validation needs at least 2 groups".into()));
    }
    (0..groups.len())
        .into_par_iter()
        .map(|held_out| {
            let mut train_set = Samples::default();
            for (g, group) in groups.iter().enumerate() {
                if g != held_out {
                    train_set.rows.extend(group.rows.iter().cloned());
                    train_set.labels.extend_from_slice(&group.labels);
                }
            }
            let model = train(&train_set, cfg)?.model;
            groups[held_out].rows.iter().map(|x| model.predict(x)).collect()
        })
        .collect()
}

/// Area under the ROC curve via the Mann-Whitney U statistic; ties count 1/2.
pub fn evaluate_auc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::InvalidInput("labels and scores differ in length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidInput("AUC needs both classes".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Sum of (1-based, tie-averaged) ranks of the positives.
    let mut rank_sum = 0.0;
    let mut k = 0;
    while k < idx.len() {
        let mut end = k + 1;
        while end < idx.len() && scores[idx[end]] == scores[idx[k]] {
            end += 1;
        }
        let avg_rank = (k + 1 + end) as f64 / 2.0;
        rank_sum += avg_rank * idx[k..end].iter().filter(|&&i| labels[i]).count() as f64;
        k = end;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn accuracy(model: &GbmModel, s: &Samples) -> f64 {
        let correct = s
            .rows
            .iter()
            .zip(&s.labels)
            .filter(|(x, &y)| (model.predict(x).unwrap() >= 0.5) == y)
            .count();
        correct as f64 / s.len() as f64
    }

    fn brute_auc(labels: &[bool], scores: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..labels.len() {
            for j in 0..labels.len() {
                if labels[i] && !labels[j] {
                    den += 1.0;
                    num += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn degenerate_single_class() {
        let s = Samples::new(vec![vec![1.0], vec![2.0], vec![3.0]], vec![true; 3]).unwrap();
        let r = train(&s, &GbmConfig::default()).unwrap();
        assert!(r.degenerate);
        assert!(r.model.trees.is_empty());
        assert!((r.model.predict(&[-100.0]).unwrap() - sigmoid(15.0)).abs() < 1e-15);
        assert!(r.model.predict(&[0.0]).unwrap() > 0.9999);
    }

    #[test]
    fn constant_models() {
        assert_eq!(GbmModel::constant(0.0, 2).predict(&[0.3, 0.4]).unwrap(), 0.5);
        let m = GbmModel::constant((0.9f64 / 0.1).ln(), 1);
        assert!((m.predict(&[0.0]).unwrap() - 0.9).abs() < 1e-12);
        assert!(m.predict(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn separable_stump_data() {
        let rows: Vec<Vec<f64>> = (0..200).map(|i| vec![(i as f64 - 99.5) / 10.0]).collect();
        let labels: Vec<bool> = rows.iter().map(|x| x[0] > 0.0).collect();
        let s = Samples::new(rows, labels).unwrap();
        let r = train(&s, &GbmConfig::default()).unwrap();
        assert_eq!(accuracy(&r.model, &s), 1.0);
        // The first tree's root is the exact separating midpoint.
        match r.model.trees[0].nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert!((threshold - 0.0).abs() < 1e-12);
            }
            Node::Leaf { .. } => panic!("expected a split"),
        }
    }

    #[test]
    fn xor_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (cx, cy) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            for _ in 0..50 {
                rows.push(vec![cx + rng.random_range(-0.2..0.2), cy + rng.random_range(-0.2..0.2)]);
                labels.push((cx > 0.5) != (cy > 0.5));
            }
        }
        let s = Samples::new(rows, labels).unwrap();
        let r = train(&s, &GbmConfig::default()).unwrap();
        assert_eq!(accuracy(&r.model, &s), 1.0);
        assert!(r.model.trees.iter().all(|t| t.depth() <= 3));
    }

    #[test]
    fn training_errors() {
        let one = Samples::new(vec![vec![1.0]], vec![true]).unwrap();
        assert!(train(&one, &GbmConfig::default()).is_err());
        let ragged = Samples::new(vec![vec![1.0], vec![1.0, 2.0]], vec![true, false]).unwrap();
        assert!(matches!(
            train(&ragged, &GbmConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Samples::new(vec![vec![1.0]], vec![]).is_err());
        let bad = GbmConfig {
            max_depth: 0,
            ..Default::default()
        };
        assert!(train(
            &Samples::new(vec![vec![0.0], vec![1.0]], vec![true, false]).unwrap(),
            &bad
        )
        .is_err());
    }

    #[test]
    fn zero_trees_balanced_auc_is_half() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let labels: Vec<bool> = (0..40).map(|i| i % 2 == 0).collect();
        let s = Samples::new(rows, labels.clone()).unwrap();
        let cfg = GbmConfig {
            n_trees: 0,
            ..Default::default()
        };
        let m = train(&s, &cfg).unwrap().model;
        let scores: Vec<f64> = s.rows.iter().map(|x| m.predict(x).unwrap()).collect();
        assert_eq!(evaluate_auc(&labels, &scores).unwrap(), 0.5);
        assert_eq!(scores[0], 0.5);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(evaluate_auc(&[true, false], &[0.9, 0.1]).unwrap(), 1.0);
        assert_eq!(evaluate_auc(&[true, false, true], &[0.3, 0.3, 0.3]).unwrap(), 0.5);
        let labels = [true, false, true, false];
        let scores = [0.9, 0.8, 0.7, 0.1];
        assert_eq!(brute_auc(&labels, &scores), 0.75);
        assert_eq!(evaluate_auc(&labels, &scores).unwrap(), 0.75);
        assert!(evaluate_auc(&[true, true], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn cross_val_needs_two_groups() {
        let g = Samples::new(vec![vec![0.0], vec![1.0]], vec![false, true]).unwrap();
        assert!(cross_val_predict(std::slice::from_ref(&g), &GbmConfig::default()).is_err());
        let cfg = GbmConfig {
            min_samples_leaf: 1,
            n_trees: 10,
            ..Default::default()
        };
        let out = cross_val_predict(&[g.clone(), g], &cfg).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().flatten().all(|p| p.is_finite() && *p > 0.0 && *p < 1.0));
    }

    #[test]
    fn cross_val_unseen_features_stay_in_range() {
        let a = Samples::new(
            (0..30).map(|i| vec![i as f64]).collect(),
            (0..30).map(|i| i >= 15).collect(),
        )
        .unwrap();
        let b = Samples::new(vec![vec![1e6], vec![-1e6]], vec![true, false]).unwrap();
        let cfg = GbmConfig {
            n_trees: 50,
            min_samples_leaf: 2,
            ..Default::default()
        };
        let out = cross_val_predict(&[a, b], &cfg).unwrap();
        assert!(out[1].iter().all(|p| *p > 0.0 && *p < 1.0));
    }

    #[test]
    fn node_table_validation() {
        let leaf = Node::Leaf { value: 1.0 };
        assert!(RegressionTree::from_nodes(vec![]).is_err());
        assert!(RegressionTree::from_nodes(vec![leaf]).is_ok());
        let cyc = Node::Split {
            feature: 0,
            threshold: 0.0,
            left: 0,
            right: 1,
        };
        assert!(RegressionTree::from_nodes(vec![cyc, leaf]).is_err());
        let dup = Node::Split {
            feature: 0,
            threshold: 0.0,
            left: 1,
            right: 1,
        };
        assert!(RegressionTree::from_nodes(vec![dup, leaf]).is_err());
        assert!(RegressionTree::from_nodes(vec![leaf, leaf]).is_err());
        assert!(RegressionTree::from_nodes(vec![Node::Leaf { value: f64::NAN }]).is_err());
    }

    fn random_samples(seed: u64, n: usize, dim: usize) -> Samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| (rng.random_range(-8..8) as f64) / 4.0).collect())
            .collect();
        let labels = rows
            .iter()
            .map(|x| x[0] + 0.5 * x[dim - 1] + rng.random_range(-1.0..1.0) > 0.0)
            .collect();
        Samples::new(rows, labels).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn auc_matches_pairwise_count(labels in prop::collection::vec(any::<bool>(), 2..40), seed in 0u64..1000) {
            prop_assume!(labels.iter().any(|&y| y) && labels.iter().any(|&y| !y));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scores: Vec<f64> = labels.iter().map(|_| rng.random_range(0..6) as f64).collect();
            let fast = evaluate_auc(&labels, &scores).unwrap();
            prop_assert!((fast - brute_auc(&labels, &scores)).abs() < 1e-12);
        }

        #[test]
        fn log_loss_never_increases(seed in 0u64..1000) {
            let s = random_samples(seed, 120, 3);
            prop_assume!(s.labels.iter().any(|&y| y) && s.labels.iter().any(|&y| !y));
            let cfg = GbmConfig { n_trees: 60, min_samples_leaf: 5, ..Default::default() };
            let r = train(&s, &cfg).unwrap();
            for w in r.stage_log_loss.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
        }

        #[test]
        fn permutation_invariant(seed in 0u64..1000) {
            let s = random_samples(seed, 80, 2);
            prop_assume!(s.labels.iter().any(|&y| y) && s.labels.iter().any(|&y| !y));
            let cfg = GbmConfig { n_trees: 20, min_samples_leaf: 4, ..Default::default() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
            let mut perm: Vec<usize> = (0..s.len()).collect();
            use rand::seq::SliceRandom;
            perm.shuffle(&mut rng);
            let shuffled = Samples::new(
                perm.iter().map(|&i| s.rows[i].clone()).collect(),
                perm.iter().map(|&i| s.labels[i]).collect(),
            ).unwrap();
            prop_assert_eq!(train(&s, &cfg).unwrap().model, train(&shuffled, &cfg).unwrap().model);
        }

        #[test]
        fn feature_shift_equivariance(seed in 0u64..1000) {
            // Dyadic values and shift keep every midpoint exact.
            let s = random_samples(seed, 80, 2);
            prop_assume!(s.labels.iter().any(|&y| y) && s.labels.iter().any(|&y| !y));
            let shift = 16.0;
            let moved = Samples::new(
                s.rows.iter().map(|x| vec![x[0] + shift, x[1]]).collect(),
                s.labels.clone(),
            ).unwrap();
            let cfg = GbmConfig { n_trees: 20, min_samples_leaf: 4, ..Default::default() };
            let a = train(&s, &cfg).unwrap().model;
            let b = train(&moved, &cfg).unwrap().model;
            for (ta, tb) in a.trees.iter().zip(&b.trees) {
                for (na, nb) in ta.nodes.iter().zip(&tb.nodes) {
                    if let (Node::Split { feature: 0, threshold: x, .. }, Node::Split { feature: 0, threshold: y, .. }) = (na, nb) {
                        prop_assert!((y - x - shift).abs() < 1e-12);
                    }
                }
            }
            for (x, y) in s.rows.iter().zip(&moved.rows) {
                prop_assert!((a.predict(x).unwrap() - b.predict(y).unwrap()).abs() < 1e-12);
            }
        }

        #[test]
        fn predictions_strictly_inside_unit_interval(x in -1e9..1e9f64) {
            let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64]).collect();
            let labels: Vec<bool> = (0..60).map(|i| i >= 30).collect();
            let cfg = GbmConfig { n_trees: 400, learning_rate: 1.0, min_samples_leaf: 1, ..Default::default() };
            let m = train(&Samples::new(rows, labels).unwrap(), &cfg).unwrap().model;
            let p = m.predict(&[x]).unwrap();
            prop_assert!(p > 0.0 && p < 1.0);
        }
    }
}
