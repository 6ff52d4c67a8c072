//! Personal-model families: most-frequent baseline, one-vs-rest logistic
//! regression and a random forest of CART trees with majority voting.
//!
//! Class order is always ascending label order, and every tie between
//! classes resolves to the numerically smallest label.

mod baseline;
mod forest;
mod logistic;
mod tree;

use alloc::vec::Vec;

pub use baseline::MostFrequentModel;
pub use forest::{ForestModel, HyperParams, MaxFeatures};
pub use logistic::{logistic_loss_and_grad, BinaryWeights, LogisticConfig, LogisticModel};
pub use tree::{gini, Node, Tree};

use crate::Label;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LearnError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset has a single class")]
    SingleClassDataset,
    #[error("expected {expected} feature columns, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{rows} rows but {labels} labels")]
    ShapeMismatch { rows: usize, labels: usize },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(&'static str),
    #[error("invalid model: {0}")]
    InvalidModel(&'static str),
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl Matrix {
    pub fn new(data: Vec<f64>, n_cols: usize) -> Result<Self, LearnError> {
        if n_cols == 0 || !data.len().is_multiple_of(n_cols) {
            return Err(LearnError::DimensionMismatch {
                expected: n_cols,
                found: data.len(),
            });
        }
        Ok(Self {
            n_rows: data.len() / n_cols,
            data,
            n_cols,
        })
    }

    /// An empty matrix with the given width.
    pub fn empty(n_cols: usize) -> Self {
        Self {
            data: Vec::new(),
            n_rows: 0,
            n_cols,
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LearnError> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(LearnError::DimensionMismatch {
                    expected: n_cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        if rows.is_empty() {
            return Ok(Self::empty(0));
        }
        Self::new(data, n_cols)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            data,
            n_rows: indices.len(),
            n_cols: self.n_cols,
        }
    }

    pub(crate) fn check_width(&self, expected: usize) -> Result<(), LearnError> {
        if self.n_rows > 0 && self.n_cols != expected {
            return Err(LearnError::DimensionMismatch {
                expected,
                found: self.n_cols,
            });
        }
        Ok(())
    }
}

/// Feature matrix with one label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<Label>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<Label>) -> Result<Self, LearnError> {
        if x.n_rows() != y.len() {
            return Err(LearnError::ShapeMismatch {
                rows: x.n_rows(),
                labels: y.len(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.n_cols()
    }

    /// Distinct labels, ascending.
    pub fn classes(&self) -> Vec<Label> {
        classes_of(&self.y)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// Errors unless the dataset is non-empty with at least two classes.
    pub(crate) fn require_classes(&self) -> Result<Vec<Label>, LearnError> {
        if self.is_empty() {
            return Err(LearnError::EmptyDataset);
        }
        let classes = self.classes();
        if classes.len() < 2 {
            return Err(LearnError::SingleClassDataset);
        }
        Ok(classes)
    }
}

pub fn classes_of(labels: &[Label]) -> Vec<Label> {
    let mut c = labels.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

/// Index of the largest count; the first (smallest label) wins ties.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Labels plus one probability row per input row, columns in `classes` order.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub classes: Vec<Label>,
    pub labels: Vec<Label>,
    pub proba: Vec<Vec<f64>>,
}

impl Predictions {
    /// Probability column of `label`, if the model knows that class.
    pub fn column(&self, label: Label) -> Option<Vec<f64>> {
        let j = self.classes.iter().position(|c| *c == label)?;
        Some(self.proba.iter().map(|row| row[j]).collect())
    }
}

/// A fitted personal model.
pub trait Classifier {
    fn classes(&self) -> &[Label];
    fn predict(&self, x: &Matrix) -> Result<Predictions, LearnError>;
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec;

    #[test]
    fn matrix_shapes() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.n_rows(), 2);
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert_eq!(m.select_rows(&[1, 1]).row(0), &[3.0, 4.0]);
        assert!(Dataset::new(m, vec![1]).is_err());
    }

    #[test]
    fn tie_breaking() {
        assert_eq!(argmax_first(&[1.0, 2.0, 2.0]), 1);
        assert_eq!(argmax_first(&[3.0, 3.0]), 0);
        assert_eq!(classes_of(&[1, -1, 0, 1]), vec![-1, 0, 1]);
    }
}
