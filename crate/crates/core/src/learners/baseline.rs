use alloc::vec;
use alloc::vec::Vec;

use super::{argmax_first, Classifier, Dataset, LearnError, Matrix, Predictions};
use crate::Label;

/// Always predicts the training majority; probability rows are the
/// empirical training distribution. Features are never read.
#[derive(Debug, Clone, PartialEq)]
pub struct MostFrequentModel {
    classes: Vec<Label>,
    prior: Vec<f64>,
    majority: Label,
}

impl MostFrequentModel {
    pub fn fit(train: &Dataset) -> Result<Self, LearnError> {
        if train.is_empty() {
            return Err(LearnError::EmptyDataset);
        }
        let classes = train.classes();
        let mut counts = vec![0.0; classes.len()];
        for y in &train.y {
            let j = classes.binary_search(y).expect("label among classes");
            counts[j] += 1.0;
        }
        let n = train.len() as f64;
        let prior: Vec<f64> = counts.iter().map(|c| c / n).collect();
        let majority = classes[argmax_first(&counts)];
        Ok(Self {
            classes,
            prior,
            majority,
        })
    }

    /// Rebuilds a model from stored parts.
    pub fn from_parts(classes: Vec<Label>, prior: Vec<f64>) -> Result<Self, LearnError> {
        let sorted = classes.windows(2).all(|p| p[0] < p[1]);
        let sum: f64 = prior.iter().sum();
        if classes.is_empty() || !sorted || prior.len() != classes.len() || (sum - 1.0).abs() > 1e-9 {
            return Err(LearnError::InvalidModel(
                "prior must be a distribution over sorted classes",
            ));
        }
        let majority = classes[argmax_first(&prior)];
        Ok(Self {
            classes,
            prior,
            majority,
        })
    }

    pub fn majority_label(&self) -> Label {
        self.majority
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }
}

impl Classifier for MostFrequentModel {
    fn classes(&self) -> &[Label] {
        &self.classes
    }

    fn predict(&self, x: &Matrix) -> Result<Predictions, LearnError> {
        let n = x.n_rows();
        Ok(Predictions {
            classes: self.classes.clone(),
            labels: vec![self.majority; n],
            proba: vec![self.prior.clone(); n],
        })
    }
}
