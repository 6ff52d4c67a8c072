//! Metrics, the per-user experiment runner and study summaries.

pub mod experiment;
pub mod metrics;
pub mod significance;
pub mod summary;

use core::fmt;
use core::str::FromStr;

pub use experiment::{
    evaluate_user, run_personal_experiment, skip_record, task_dataset, user_seed, ExperimentError, ExperimentOutcome,
    ModelEvaluation, Protocol, SkipRecord, UserData, UserEvaluation,
};
pub use metrics::{accuracy, binary_auc, roc_auc, weighted_f1};
pub use significance::{paired_significance, signed_rank_test, user_lift};
pub use summary::{format_cell, summarize_study, ConditionSummary, MetricSummary, ModelSummary, StudySummary};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("AUC is undefined when the truth has a single class")]
    SingleClassTruth,
    #[error("{0} pairs, at least 5 are required")]
    TooFewPairs(usize),
    #[error("condition {condition} ({task}) has {n} users, at least 2 are required")]
    TooFewUsers { condition: u8, task: Task, n: usize },
}

/// Which emotions are classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Task {
    /// Happy vs sad; neutral windows are dropped.
    Binary,
    /// Happy vs neutral vs sad.
    Ternary,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Binary => "binary",
            Task::Ternary => "ternary",
        })
    }
}

impl FromStr for Task {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "binary" => Ok(Task::Binary),
            "ternary" => Ok(Task::Ternary),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ModelKind {
    Baseline,
    LogisticRegression,
    RandomForest,
    RandomForestTuned,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Baseline,
        ModelKind::LogisticRegression,
        ModelKind::RandomForest,
        ModelKind::RandomForestTuned,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Baseline => "baseline",
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::RandomForest => "random_forest",
            ModelKind::RandomForestTuned => "random_forest_tuned",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricSet {
    pub auc: f64,
    pub f1_weighted: f64,
    pub accuracy: f64,
}

impl MetricSet {
    pub fn mean_of(sets: &[MetricSet]) -> MetricSet {
        let n = sets.len() as f64;
        MetricSet {
            auc: sets.iter().map(|m| m.auc).sum::<f64>() / n,
            f1_weighted: sets.iter().map(|m| m.f1_weighted).sum::<f64>() / n,
            accuracy: sets.iter().map(|m| m.accuracy).sum::<f64>() / n,
        }
    }
}
