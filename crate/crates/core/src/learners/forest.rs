use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use super::tree::{grow_tree, FeatureRanks, GrowParams, Tree};
use super::{argmax_first, Classifier, Dataset, LearnError, Matrix, Predictions};
use crate::{seed, Label};

/// How many features each split considers.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "String", try_from = "String"))]
pub enum MaxFeatures {
    Sqrt,
    Log2,
    /// Fraction of all features, in `(0, 1]`.
    Fraction(f64),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let d = n_features as f64;
        let k = match self {
            MaxFeatures::Sqrt => libm::sqrt(d),
            MaxFeatures::Log2 => libm::log2(d),
            MaxFeatures::Fraction(f) => f * d,
        };
        (k as usize).clamp(1, n_features.max(1))
    }

    fn is_valid(self) -> bool {
        match self {
            MaxFeatures::Fraction(f) => f > 0.0 && f <= 1.0,
            _ => true,
        }
    }
}

impl fmt::Display for MaxFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxFeatures::Sqrt => f.write_str("sqrt"),
            MaxFeatures::Log2 => f.write_str("log2"),
            MaxFeatures::Fraction(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for MaxFeatures {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = LearnError::InvalidHyperParams("max_features must be sqrt, log2 or a fraction in (0, 1]");
        let v = match s.trim() {
            "sqrt" => MaxFeatures::Sqrt,
            "log2" => MaxFeatures::Log2,
            other => MaxFeatures::Fraction(other.parse().map_err(|_| bad.clone())?),
        };
        if v.is_valid() {
            Ok(v)
        } else {
            Err(bad)
        }
    }
}

impl From<MaxFeatures> for String {
    fn from(m: MaxFeatures) -> String {
        alloc::format!("{m}")
    }
}

impl TryFrom<String> for MaxFeatures {
    type Error = LearnError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct HyperParams {
    pub n_trees: usize,
    /// `None` grows until the other stopping rules fire.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

impl Default for HyperParams {
    /// The untuned comparator forest.
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<(), LearnError> {
        if self.n_trees == 0 {
            return Err(LearnError::InvalidHyperParams("n_trees must be at least 1"));
        }
        if self.max_depth == Some(0) {
            return Err(LearnError::InvalidHyperParams("max_depth must be at least 1"));
        }
        if self.min_samples_split < 2 {
            return Err(LearnError::InvalidHyperParams("min_samples_split must be at least 2"));
        }
        if self.min_samples_leaf == 0 {
            return Err(LearnError::InvalidHyperParams("min_samples_leaf must be at least 1"));
        }
        if !self.max_features.is_valid() {
            return Err(LearnError::InvalidHyperParams(
                "max_features fraction must lie in (0, 1]",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    classes: Vec<Label>,
    n_features: usize,
    trees: Vec<Tree>,
    hyperparams: HyperParams,
    seed: u64,
}

impl ForestModel {
    /// Tree `t` draws all of its randomness from a generator keyed by
    /// `(seed, t)`, so the forest does not depend on training order.
    pub fn fit(train: &Dataset, hp: &HyperParams, seed: u64) -> Result<Self, LearnError> {
        hp.validate()?;
        let classes = train.require_classes()?;
        let y: Vec<usize> = train
            .y
            .iter()
            .map(|l| classes.binary_search(l).expect("label among classes"))
            .collect();
        let n = train.len();
        let d = train.n_features();
        let params = GrowParams {
            max_depth: hp.max_depth,
            min_samples_split: hp.min_samples_split,
            min_samples_leaf: hp.min_samples_leaf,
            max_features: hp.max_features.resolve(d),
        };
        let ranks = FeatureRanks::new(&train.x);
        let trees = (0..hp.n_trees)
            .map(|t| {
                let mut rng = seed::rng(&[seed, t as u64]);
                let mut rows: Vec<usize> = if hp.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                grow_tree(&train.x, &ranks, &y, &classes, &mut rows, &params, &mut rng)
            })
            .collect();
        Ok(Self {
            classes,
            n_features: d,
            trees,
            hyperparams: *hp,
            seed,
        })
    }

    pub fn from_parts(
        classes: Vec<Label>,
        n_features: usize,
        trees: Vec<Tree>,
        hyperparams: HyperParams,
        seed: u64,
    ) -> Result<Self, LearnError> {
        hyperparams.validate()?;
        let ok = classes.len() >= 2
            && classes.windows(2).all(|p| p[0] < p[1])
            && trees.len() == hyperparams.n_trees
            && trees
                .iter()
                .all(|t| t.is_well_formed(n_features) && t.leaves().all(|(l, _)| classes.contains(&l)));
        if !ok {
            return Err(LearnError::InvalidModel("inconsistent forest parts"));
        }
        Ok(Self {
            classes,
            n_features,
            trees,
            hyperparams,
            seed,
        })
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn hyperparams(&self) -> &HyperParams {
        &self.hyperparams
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Every tree's label for one row.
    pub fn votes(&self, row: &[f64]) -> Vec<Label> {
        self.trees.iter().map(|t| t.predict_row(row)).collect()
    }
}

impl Classifier for ForestModel {
    fn classes(&self) -> &[Label] {
        &self.classes
    }

    fn predict(&self, x: &Matrix) -> Result<Predictions, LearnError> {
        x.check_width(self.n_features)?;
        let n_trees = self.trees.len() as f64;
        let mut labels = Vec::with_capacity(x.n_rows());
        let mut proba = Vec::with_capacity(x.n_rows());
        for row in x.rows() {
            let mut counts = vec![0.0; self.classes.len()];
            for t in &self.trees {
                let l = t.predict_row(row);
                counts[self.classes.binary_search(&l).expect("leaf label among classes")] += 1.0;
            }
            labels.push(self.classes[argmax_first(&counts)]);
            proba.push(counts.iter().map(|c| c / n_trees).collect());
        }
        Ok(Predictions {
            classes: self.classes.clone(),
            labels,
            proba,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::Node;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn random_data(seed: u64, n: usize, d: usize, n_classes: i8) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<Label> = (0..n).map(|i| (i as i8 % n_classes) - 1).collect();
        Dataset::new(Matrix::new(x, d).unwrap(), y).unwrap()
    }

    fn leaf(label: Label) -> Tree {
        Tree {
            nodes: vec![Node::Leaf { label, samples: 1 }],
        }
    }

    fn forest_of(labels: &[Label]) -> ForestModel {
        let hp = HyperParams {
            n_trees: labels.len(),
            ..HyperParams::default()
        };
        ForestModel::from_parts(vec![-1, 0, 1], 2, labels.iter().map(|&l| leaf(l)).collect(), hp, 0).unwrap()
    }

    #[test]
    fn majority_vote() {
        let f = forest_of(&[1, 1, -1]);
        let p = f.predict(&Matrix::new(vec![0.0, 0.0], 2).unwrap()).unwrap();
        assert_eq!(p.labels, vec![1]);
        assert_eq!(p.proba[0], vec![1.0 / 3.0, 0.0, 2.0 / 3.0]);

        let mut ten = vec![1; 7];
        ten.extend([-1, 0, 0]);
        let p = forest_of(&ten)
            .predict(&Matrix::new(vec![0.0, 0.0], 2).unwrap())
            .unwrap();
        assert_eq!(p.proba[0][2], 0.7);

        let tie = forest_of(&[1, -1])
            .predict(&Matrix::new(vec![0.0, 0.0], 2).unwrap())
            .unwrap();
        assert_eq!(tie.labels, vec![-1]);
    }

    #[test]
    fn memorizing_tree() {
        let data = random_data(1, 40, 6, 3);
        let hp = HyperParams {
            n_trees: 1,
            bootstrap: false,
            ..HyperParams::default()
        };
        let f = ForestModel::fit(&data, &hp, 9).unwrap();
        assert_eq!(f.predict(&data.x).unwrap().labels, data.y);
    }

    #[test]
    fn deterministic_given_seed() {
        let data = random_data(2, 60, 8, 2);
        let hp = HyperParams {
            n_trees: 15,
            ..HyperParams::default()
        };
        let a = ForestModel::fit(&data, &hp, 77).unwrap();
        let b = ForestModel::fit(&data, &hp, 77).unwrap();
        assert_eq!(a, b);
        let c = ForestModel::fit(&data, &hp, 78).unwrap();
        assert_ne!(a.trees(), c.trees());
    }

    #[test]
    fn fit_errors() {
        let data = random_data(3, 10, 2, 1);
        assert_eq!(
            ForestModel::fit(&data, &HyperParams::default(), 0),
            Err(LearnError::SingleClassDataset)
        );
        let empty = Dataset::new(Matrix::empty(2), vec![]).unwrap();
        assert_eq!(
            ForestModel::fit(&empty, &HyperParams::default(), 0),
            Err(LearnError::EmptyDataset)
        );
        let bad = HyperParams {
            min_samples_split: 1,
            ..HyperParams::default()
        };
        assert!(matches!(
            ForestModel::fit(&random_data(3, 10, 2, 2), &bad, 0),
            Err(LearnError::InvalidHyperParams(_))
        ));
        let f = ForestModel::fit(
            &random_data(3, 10, 2, 2),
            &HyperParams {
                n_trees: 2,
                ..HyperParams::default()
            },
            0,
        )
        .unwrap();
        assert!(matches!(
            f.predict(&Matrix::new(vec![0.0; 3], 3).unwrap()),
            Err(LearnError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn structural_bounds() {
        for (seed, depth, leaf_min, bootstrap) in [(4, Some(3), 1, true), (5, None, 4, false), (6, Some(1), 2, true)] {
            let data = random_data(seed, 80, 5, 3);
            let hp = HyperParams {
                n_trees: 10,
                max_depth: depth,
                min_samples_leaf: leaf_min,
                bootstrap,
                ..HyperParams::default()
            };
            let f = ForestModel::fit(&data, &hp, seed).unwrap();
            for t in f.trees() {
                assert!(depth.is_none_or(|d| t.depth() <= d));
                assert!(t.leaves().all(|(_, n)| n >= leaf_min));
            }
        }
    }

    #[test]
    fn max_features_resolution() {
        assert_eq!(MaxFeatures::Sqrt.resolve(107), 10);
        assert_eq!(MaxFeatures::Log2.resolve(107), 6);
        assert_eq!(MaxFeatures::Fraction(0.3).resolve(107), 32);
        assert_eq!(MaxFeatures::Fraction(1.0).resolve(107), 107);
        assert_eq!(MaxFeatures::Fraction(0.01).resolve(5), 1);
        assert_eq!("0.5".parse::<MaxFeatures>().unwrap(), MaxFeatures::Fraction(0.5));
        assert!("1.5".parse::<MaxFeatures>().is_err());
        assert!("cbrt".parse::<MaxFeatures>().is_err());
    }

    /// Independent vote counting: mode of the votes, smallest label on ties.
    fn brute_mode(votes: &[Label]) -> Label {
        let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
        for v in votes {
            *counts.entry(*v).or_default() += 1;
        }
        let top = *counts.values().max().unwrap();
        *counts.iter().find(|(_, c)| **c == top).unwrap().0
    }

    #[test]
    fn prediction_is_mode_of_votes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..200 {
            let data = random_data(case, 30, 4, if case % 2 == 0 { 2 } else { 3 });
            let hp = HyperParams {
                n_trees: rng.random_range(1..8),
                max_depth: Some(rng.random_range(1..4)),
                ..HyperParams::default()
            };
            let f = ForestModel::fit(&data, &hp, case).unwrap();
            let p = f.predict(&data.x).unwrap();
            for (i, row) in data.x.rows().enumerate() {
                assert_eq!(p.labels[i], brute_mode(&f.votes(row)), "case {case} row {i}");
                assert!((p.proba[i].iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
