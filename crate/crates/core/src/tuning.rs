//! Randomized hyperparameter search for the forest, scored by k-fold
//! cross-validated accuracy.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::learners::{Classifier, Dataset, ForestModel, HyperParams, LearnError, MaxFeatures};
use crate::{seed, Label};

const SAMPLE_STREAM: u64 = 0x5A3B;
const FOLD_STREAM: u64 = 0xF01D;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TuneError {
    #[error("empty search space: {0}")]
    EmptySpace(&'static str),
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("class {label} has {count} members, fewer than k = {k}")]
    TooFewPerClass { label: Label, count: usize, k: usize },
    #[error("n_iter must be at least 1")]
    NoIterations,
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// Inclusive integer range.
pub type Range = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SearchSpace {
    pub n_trees: Range,
    /// Finite depth choices; `max_depth_unlimited` adds "no limit".
    pub max_depth: Option<Range>,
    pub max_depth_unlimited: bool,
    pub min_samples_split: Range,
    pub min_samples_leaf: Range,
    pub max_features: Vec<MaxFeatures>,
    pub bootstrap: Vec<bool>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            n_trees: (50, 500),
            max_depth: Some((5, 30)),
            max_depth_unlimited: true,
            min_samples_split: (2, 20),
            min_samples_leaf: (1, 10),
            max_features: vec![
                MaxFeatures::Sqrt,
                MaxFeatures::Log2,
                MaxFeatures::Fraction(0.3),
                MaxFeatures::Fraction(0.5),
                MaxFeatures::Fraction(0.7),
                MaxFeatures::Fraction(1.0),
            ],
            bootstrap: vec![true, false],
        }
    }
}

fn check_range(r: Range, min: usize, what: &'static str) -> Result<(), TuneError> {
    if r.0 > r.1 || r.0 < min {
        return Err(TuneError::EmptySpace(what));
    }
    Ok(())
}

impl SearchSpace {
    pub fn validate(&self) -> Result<(), TuneError> {
        check_range(self.n_trees, 1, "n_trees")?;
        if let Some(depth) = self.max_depth {
            check_range(depth, 1, "max_depth")?;
        } else if !self.max_depth_unlimited {
            return Err(TuneError::EmptySpace("max_depth"));
        }
        check_range(self.min_samples_split, 2, "min_samples_split")?;
        check_range(self.min_samples_leaf, 1, "min_samples_leaf")?;
        if self.max_features.is_empty() {
            return Err(TuneError::EmptySpace("max_features"));
        }
        if self
            .max_features
            .iter()
            .any(|m| matches!(m, MaxFeatures::Fraction(f) if !(*f > 0.0 && *f <= 1.0)))
        {
            return Err(TuneError::EmptySpace("max_features fraction outside (0, 1]"));
        }
        if self.bootstrap.is_empty() {
            return Err(TuneError::EmptySpace("bootstrap"));
        }
        Ok(())
    }

    /// A space containing only `hp`.
    pub fn singleton(hp: &HyperParams) -> Self {
        Self {
            n_trees: (hp.n_trees, hp.n_trees),
            max_depth: hp.max_depth.map(|d| (d, d)),
            max_depth_unlimited: hp.max_depth.is_none(),
            min_samples_split: (hp.min_samples_split, hp.min_samples_split),
            min_samples_leaf: (hp.min_samples_leaf, hp.min_samples_leaf),
            max_features: vec![hp.max_features],
            bootstrap: vec![hp.bootstrap],
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> HyperParams {
        let n_trees = rng.random_range(self.n_trees.0..=self.n_trees.1);
        let (lo, finite) = self.max_depth.map_or((0, 0), |(lo, hi)| (lo, hi - lo + 1));
        let pick = rng.random_range(0..finite + usize::from(self.max_depth_unlimited));
        let max_depth = (pick < finite).then_some(lo + pick);
        let min_samples_split = rng.random_range(self.min_samples_split.0..=self.min_samples_split.1);
        let min_samples_leaf = rng.random_range(self.min_samples_leaf.0..=self.min_samples_leaf.1);
        let max_features = self.max_features[rng.random_range(0..self.max_features.len())];
        let bootstrap = self.bootstrap[rng.random_range(0..self.bootstrap.len())];
        HyperParams {
            n_trees,
            max_depth,
            min_samples_split,
            min_samples_leaf,
            max_features,
            bootstrap,
        }
    }
}

/// Draws `n_iter` configurations, each field uniform over its range.
pub fn sample_hyperparams(space: &SearchSpace, n_iter: usize, seed: u64) -> Result<Vec<HyperParams>, TuneError> {
    if n_iter == 0 {
        return Err(TuneError::NoIterations);
    }
    space.validate()?;
    let mut rng = seed::rng(&[seed, SAMPLE_STREAM]);
    Ok((0..n_iter).map(|_| space.draw(&mut rng)).collect())
}

/// How cross-validation folds are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FoldMode {
    /// Per-class shuffled round-robin assignment.
    #[default]
    Stratified,
    /// Per-class contiguous blocks in original order, so neighbouring
    /// (overlapping) windows mostly land in the same fold.
    ContiguousBlocks,
}

fn per_class_indices(y: &[Label], k: usize) -> Result<Vec<Vec<usize>>, TuneError> {
    if k < 2 {
        return Err(TuneError::InvalidK(k));
    }
    let classes = crate::learners::classes_of(y);
    let mut out = Vec::with_capacity(classes.len());
    for c in classes {
        let idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        if idx.len() < k {
            return Err(TuneError::TooFewPerClass {
                label: c,
                count: idx.len(),
                k,
            });
        }
        out.push(idx);
    }
    Ok(out)
}

/// Splits indices into `k` test folds. Each class is shuffled and dealt
/// round-robin starting from fold 0, so per-class counts differ by at most
/// one across folds. Fold contents are returned in ascending order.
pub fn stratified_kfold(y: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, TuneError> {
    let mut rng = seed::rng(&[seed, FOLD_STREAM]);
    let mut folds = vec![Vec::new(); k.max(2)];
    for mut idx in per_class_indices(y, k)? {
        idx.shuffle(&mut rng);
        for (i, v) in idx.into_iter().enumerate() {
            folds[i % k].push(v);
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Splits each class's indices into `k` contiguous blocks.
pub fn contiguous_kfold(y: &[Label], k: usize) -> Result<Vec<Vec<usize>>, TuneError> {
    let mut folds = vec![Vec::new(); k.max(2)];
    for idx in per_class_indices(y, k)? {
        let (base, extra) = (idx.len() / k, idx.len() % k);
        let mut start = 0;
        for (f, fold) in folds.iter_mut().enumerate() {
            let len = base + usize::from(f < extra);
            fold.extend_from_slice(&idx[start..start + len]);
            start += len;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

pub fn make_folds(y: &[Label], k: usize, seed: u64, mode: FoldMode) -> Result<Vec<Vec<usize>>, TuneError> {
    match mode {
        FoldMode::Stratified => stratified_kfold(y, k, seed),
        FoldMode::ContiguousBlocks => contiguous_kfold(y, k),
    }
}

/// Indices of `0..n` not in `test` (which must be sorted).
pub fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - test.len());
    let mut t = test.iter().peekable();
    for i in 0..n {
        if t.peek() == Some(&&i) {
            t.next();
        } else {
            out.push(i);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CvResult {
    pub params: HyperParams,
    pub fold_scores: Vec<f64>,
    pub mean_score: f64,
    pub sample_index: usize,
}

fn accuracy(truth: &[Label], pred: &[Label]) -> f64 {
    let hits = truth.iter().zip(pred).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Cross-validated accuracy of `params` on precomputed folds. The forest of
/// fold `i` is seeded with `(seed, sample_index, i)`.
pub fn cross_val_score_on(
    data: &Dataset,
    params: &HyperParams,
    folds: &[Vec<usize>],
    seed: u64,
    sample_index: usize,
) -> Result<CvResult, TuneError> {
    let mut fold_scores = Vec::with_capacity(folds.len());
    for (i, test) in folds.iter().enumerate() {
        let train_idx = complement(data.len(), test);
        let train = data.subset(&train_idx);
        let held = data.subset(test);
        let fold_seed = seed::derive(&[seed, sample_index as u64, i as u64]);
        let model = ForestModel::fit(&train, params, fold_seed)?;
        let pred = model.predict(&held.x)?;
        fold_scores.push(accuracy(&held.y, &pred.labels));
    }
    let mean_score = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
    Ok(CvResult {
        params: *params,
        fold_scores,
        mean_score,
        sample_index,
    })
}

/// Stratified k-fold cross-validated accuracy.
pub fn cross_val_score(data: &Dataset, params: &HyperParams, k: usize, seed: u64) -> Result<CvResult, TuneError> {
    let folds = stratified_kfold(&data.y, k, seed)?;
    cross_val_score_on(data, params, &folds, seed, 0)
}

/// Position of the best mean score; the earliest sample wins ties.
pub fn select_best(results: &[CvResult]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        if best.is_none_or(|b| r.mean_score > results[b].mean_score) {
            best = Some(i);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchOutcome {
    pub best: HyperParams,
    pub best_index: usize,
    pub all: Vec<CvResult>,
}

/// Random search where every candidate is scored on the same folds.
pub fn random_search_on(
    data: &Dataset,
    space: &SearchSpace,
    n_iter: usize,
    folds: &[Vec<usize>],
    seed: u64,
) -> Result<SearchOutcome, TuneError> {
    let candidates = sample_hyperparams(space, n_iter, seed)?;
    let all = candidates
        .iter()
        .enumerate()
        .map(|(i, hp)| cross_val_score_on(data, hp, folds, seed, i))
        .collect::<Result<Vec<_>, _>>()?;
    let best_index = select_best(&all).expect("n_iter >= 1");
    Ok(SearchOutcome {
        best: all[best_index].params,
        best_index,
        all,
    })
}

pub fn random_search(
    data: &Dataset,
    space: &SearchSpace,
    n_iter: usize,
    k: usize,
    seed: u64,
) -> Result<SearchOutcome, TuneError> {
    let folds = stratified_kfold(&data.y, k, seed)?;
    random_search_on(data, space, n_iter, &folds, seed)
}
