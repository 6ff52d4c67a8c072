//! Across-user summaries per condition and task.

use alloc::string::String;
use alloc::vec::Vec;

use super::experiment::UserEvaluation;
use super::significance::{paired_significance, user_lift, MIN_PAIRS};
use super::{EvalError, MetricSet, ModelKind, Task};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
}

impl MetricSummary {
    /// Requires at least two values.
    pub fn of(values: &[f64]) -> MetricSummary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        MetricSummary {
            mean,
            std: libm::sqrt(ss / (n - 1.0)),
        }
    }
}

/// Renders `mean (std)` with three decimals, e.g. `0.850 (0.071)`.
pub fn format_cell(s: &MetricSummary) -> String {
    alloc::format!("{:.3} ({:.3})", s.mean, s.std)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSummary {
    pub model: ModelKind,
    pub auc: MetricSummary,
    pub f1_weighted: MetricSummary,
    pub accuracy: MetricSummary,
    /// Empty for the baseline itself.
    pub user_lift: Option<f64>,
    /// Empty for the baseline and when fewer than five users are paired.
    pub p_value: Option<f64>,
    /// Per-user accuracies in participant order.
    pub user_accuracies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConditionSummary {
    pub condition: u8,
    pub task: Task,
    pub participants: Vec<String>,
    pub models: Vec<ModelSummary>,
}

impl ConditionSummary {
    pub fn model(&self, kind: ModelKind) -> Option<&ModelSummary> {
        self.models.iter().find(|m| m.model == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudySummary {
    /// Sorted by task, then condition.
    pub groups: Vec<ConditionSummary>,
}

impl StudySummary {
    pub fn group(&self, task: Task, condition: u8) -> Option<&ConditionSummary> {
        self.groups.iter().find(|g| g.task == task && g.condition == condition)
    }

    /// Mean over conditions of one model's mean accuracy.
    pub fn cross_condition_mean(&self, task: Task, model: ModelKind) -> Option<f64> {
        let means: Vec<f64> = self
            .groups
            .iter()
            .filter(|g| g.task == task)
            .filter_map(|g| g.model(model))
            .map(|m| m.accuracy.mean)
            .collect();
        if means.is_empty() {
            return None;
        }
        Some(means.iter().sum::<f64>() / means.len() as f64)
    }
}

fn summarize_group(condition: u8, task: Task, mut evals: Vec<&UserEvaluation>) -> Result<ConditionSummary, EvalError> {
    if evals.len() < 2 {
        return Err(EvalError::TooFewUsers {
            condition,
            task,
            n: evals.len(),
        });
    }
    // a fixed order makes every floating-point sum independent of input order
    evals.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));
    let metrics = |kind: ModelKind| -> Vec<MetricSet> {
        evals
            .iter()
            .map(|e| {
                e.model(kind).map_or(
                    MetricSet {
                        auc: f64::NAN,
                        f1_weighted: f64::NAN,
                        accuracy: f64::NAN,
                    },
                    |m| m.metrics,
                )
            })
            .collect()
    };
    let baseline: Vec<f64> = metrics(ModelKind::Baseline).iter().map(|m| m.accuracy).collect();
    let mut models = Vec::with_capacity(ModelKind::ALL.len());
    for kind in ModelKind::ALL {
        let sets = metrics(kind);
        let acc: Vec<f64> = sets.iter().map(|m| m.accuracy).collect();
        let (lift, p) = if kind == ModelKind::Baseline {
            (None, None)
        } else {
            let lift = user_lift(&acc, &baseline)?;
            let p = if acc.len() >= MIN_PAIRS {
                Some(paired_significance(&acc, &baseline)?)
            } else {
                None
            };
            (Some(lift), p)
        };
        models.push(ModelSummary {
            model: kind,
            auc: MetricSummary::of(&sets.iter().map(|m| m.auc).collect::<Vec<_>>()),
            f1_weighted: MetricSummary::of(&sets.iter().map(|m| m.f1_weighted).collect::<Vec<_>>()),
            accuracy: MetricSummary::of(&acc),
            user_lift: lift,
            p_value: p,
            user_accuracies: acc,
        });
    }
    Ok(ConditionSummary {
        condition,
        task,
        participants: evals.iter().map(|e| e.participant_id.clone()).collect(),
        models,
    })
}

/// Groups evaluations by (task, condition) and summarizes each group.
pub fn summarize_study(evals: &[UserEvaluation]) -> Result<StudySummary, EvalError> {
    let mut keys: Vec<(Task, u8)> = evals.iter().map(|e| (e.task, e.condition)).collect();
    keys.sort_unstable();
    keys.dedup();
    let groups = keys
        .into_iter()
        .map(|(task, condition)| {
            let members = evals
                .iter()
                .filter(|e| e.task == task && e.condition == condition)
                .collect();
            summarize_group(condition, task, members)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StudySummary { groups })
}
