//! Accuracy, support-weighted F1 and ROC AUC.

use alloc::vec::Vec;

use super::{EvalError, Task};
use crate::learners::classes_of;
use crate::Label;

fn check_lengths(a: usize, b: usize) -> Result<(), EvalError> {
    if a != b {
        return Err(EvalError::LengthMismatch(a, b));
    }
    if a == 0 {
        return Err(EvalError::EmptyInput);
    }
    Ok(())
}

pub fn accuracy(y_true: &[Label], y_pred: &[Label]) -> Result<f64, EvalError> {
    check_lengths(y_true.len(), y_pred.len())?;
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

/// Per-class F1 averaged with weights proportional to true-class support.
/// A class with zero precision and recall contributes F1 = 0.
pub fn weighted_f1(y_true: &[Label], y_pred: &[Label]) -> Result<f64, EvalError> {
    check_lengths(y_true.len(), y_pred.len())?;
    let n = y_true.len() as f64;
    let mut total = 0.0;
    for c in classes_of(y_true) {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (&t, &p) in y_true.iter().zip(y_pred) {
            match (t == c, p == c) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        let support = (tp + fn_) as f64;
        // 2PR/(P+R) simplifies to 2tp/(2tp+fp+fn); zero when tp = 0.
        let f1 = if tp == 0 {
            0.0
        } else {
            2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
        };
        total += support / n * f1;
    }
    Ok(total)
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Computed from mid-ranks in O(n log n).
pub fn binary_auc(is_positive: &[bool], scores: &[f64]) -> Result<f64, EvalError> {
    check_lengths(is_positive.len(), scores.len())?;
    let n_pos = is_positive.iter().filter(|&&p| p).count();
    let n_neg = is_positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClassTruth);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let mid = (i + j + 2) as f64 / 2.0;
        let pos_in_group = order[i..=j].iter().filter(|&&k| is_positive[k]).count();
        rank_sum_pos += mid * pos_in_group as f64;
        i = j + 1;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q))
}

/// Binary task: AUC of the largest class's probability column. Ternary:
/// unweighted mean of the one-vs-rest AUCs of every class in `classes`.
pub fn roc_auc(y_true: &[Label], classes: &[Label], proba: &[Vec<f64>], task: Task) -> Result<f64, EvalError> {
    check_lengths(y_true.len(), proba.len())?;
    if classes.is_empty() || proba.iter().any(|r| r.len() != classes.len()) {
        return Err(EvalError::LengthMismatch(
            classes.len(),
            proba.first().map_or(0, Vec::len),
        ));
    }
    let column = |j: usize| proba.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let auc_for = |j: usize| {
        let pos: Vec<bool> = y_true.iter().map(|&l| l == classes[j]).collect();
        binary_auc(&pos, &column(j))
    };
    match task {
        Task::Binary => auc_for(classes.len() - 1),
        Task::Ternary => {
            let mut sum = 0.0;
            for j in 0..classes.len() {
                sum += auc_for(j)?;
            }
            Ok(sum / classes.len() as f64)
        }
    }
}
