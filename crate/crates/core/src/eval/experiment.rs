//! Personal-model experiment: every user-condition is cross-validated on its
//! own windows with four models sharing one set of folds.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::metrics::{accuracy, roc_auc, weighted_f1};
use super::{EvalError, MetricSet, ModelKind, Task};
use crate::features::FeatureVector;
use crate::learners::{
    Classifier, Dataset, ForestModel, HyperParams, LearnError, LogisticConfig, LogisticModel, Matrix, MostFrequentModel,
};
use crate::tuning::{complement, make_folds, random_search_on, FoldMode, SearchOutcome, SearchSpace, TuneError};
use crate::{seed, Label};

const DEFAULT_FOREST_STREAM: u64 = 1;
const SEARCH_STREAM: u64 = 2;
const TUNED_FOREST_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Protocol {
    pub k: usize,
    pub n_iter: usize,
    pub seed: u64,
    pub fold_mode: FoldMode,
    pub space: SearchSpace,
    pub logistic: LogisticConfig,
    pub forest: HyperParams,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            k: 5,
            n_iter: 50,
            seed: 0,
            fold_mode: FoldMode::Stratified,
            space: SearchSpace::default(),
            logistic: LogisticConfig::default(),
            forest: HyperParams::default(),
        }
    }
}

/// The windows of one participant under one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct UserData {
    pub participant_id: String,
    pub condition: u8,
    pub features: Vec<FeatureVector>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelEvaluation {
    pub model: ModelKind,
    /// Mean of `folds`.
    pub metrics: MetricSet,
    pub folds: Vec<MetricSet>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UserEvaluation {
    pub participant_id: String,
    pub condition: u8,
    pub task: Task,
    pub n_windows: usize,
    /// One entry per [`ModelKind::ALL`], in that order.
    pub models: Vec<ModelEvaluation>,
    /// The search run inside each fold, with every candidate's scores.
    pub tuning: Vec<SearchOutcome>,
}

impl UserEvaluation {
    pub fn model(&self, kind: ModelKind) -> Option<&ModelEvaluation> {
        self.models.iter().find(|m| m.model == kind)
    }

    pub fn accuracy(&self, kind: ModelKind) -> Option<f64> {
        self.model(kind).map(|m| m.metrics.accuracy)
    }

    /// Configuration chosen in each fold.
    pub fn tuned_params(&self) -> impl Iterator<Item = &HyperParams> {
        self.tuning.iter().map(|t| &t.best)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SkipRecord {
    pub participant_id: String,
    pub condition: u8,
    pub task: Task,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentOutcome {
    pub evaluations: Vec<UserEvaluation>,
    pub skipped: Vec<SkipRecord>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("no windows left for the task")]
    NoWindows,
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Seed of one user-condition, independent of evaluation order.
pub fn user_seed(run_seed: u64, participant_id: &str, condition: u8) -> u64 {
    seed::derive(&[run_seed, seed::hash_str(participant_id), u64::from(condition)])
}

/// Windows as a labelled dataset; the binary task drops neutral windows.
pub fn task_dataset(features: &[FeatureVector], task: Task) -> Result<Dataset, LearnError> {
    let kept: Vec<&FeatureVector> = features
        .iter()
        .filter(|f| task == Task::Ternary || f.emotion.label() != 0)
        .collect();
    let width = kept.first().map_or(0, |f| f.values.len());
    let mut data = Vec::with_capacity(kept.len() * width);
    for f in &kept {
        if f.values.len() != width {
            return Err(LearnError::DimensionMismatch {
                expected: width,
                found: f.values.len(),
            });
        }
        data.extend_from_slice(&f.values);
    }
    let y: Vec<Label> = kept.iter().map(|f| f.emotion.label()).collect();
    Dataset::new(Matrix::new(data, width)?, y)
}

fn score(model: &dyn Classifier, test: &Dataset, task: Task) -> Result<MetricSet, ExperimentError> {
    let pred = model.predict(&test.x)?;
    Ok(MetricSet {
        auc: roc_auc(&test.y, &pred.classes, &pred.proba, task)?,
        f1_weighted: weighted_f1(&test.y, &pred.labels)?,
        accuracy: accuracy(&test.y, &pred.labels)?,
    })
}

/// Cross-validates the four models on one user-condition.
pub fn evaluate_user(unit: &UserData, task: Task, protocol: &Protocol) -> Result<UserEvaluation, ExperimentError> {
    let data = task_dataset(&unit.features, task)?;
    if data.is_empty() {
        return Err(ExperimentError::NoWindows);
    }
    let useed = user_seed(protocol.seed, &unit.participant_id, unit.condition);
    let folds = make_folds(&data.y, protocol.k, useed, protocol.fold_mode)?;

    let mut per_model: [Vec<MetricSet>; 4] = Default::default();
    let mut tuning = Vec::with_capacity(folds.len());
    for (i, test_idx) in folds.iter().enumerate() {
        let train_idx = complement(data.len(), test_idx);
        assert!(
            train_idx.iter().all(|t| test_idx.binary_search(t).is_err()),
            "train and test indices overlap"
        );
        let train = data.subset(&train_idx);
        let test = data.subset(test_idx);
        let fold = i as u64;

        let baseline = MostFrequentModel::fit(&train)?;
        per_model[0].push(score(&baseline, &test, task)?);

        let logistic = LogisticModel::fit(&train, &protocol.logistic)?;
        per_model[1].push(score(&logistic, &test, task)?);

        let forest_seed = seed::derive(&[useed, DEFAULT_FOREST_STREAM, fold]);
        let forest = ForestModel::fit(&train, &protocol.forest, forest_seed)?;
        per_model[2].push(score(&forest, &test, task)?);

        // The search only ever sees `train`, whose indices are local to it.
        let search_seed = seed::derive(&[useed, SEARCH_STREAM, fold]);
        let inner = make_folds(&train.y, protocol.k, search_seed, protocol.fold_mode)?;
        assert!(inner.iter().flatten().all(|&j| j < train.len()));
        let outcome = random_search_on(&train, &protocol.space, protocol.n_iter, &inner, search_seed)?;
        let tuned_seed = seed::derive(&[useed, TUNED_FOREST_STREAM, fold]);
        let tuned = ForestModel::fit(&train, &outcome.best, tuned_seed)?;
        per_model[3].push(score(&tuned, &test, task)?);
        tuning.push(outcome);
    }

    let models = ModelKind::ALL
        .iter()
        .zip(per_model)
        .map(|(&model, folds)| ModelEvaluation {
            model,
            metrics: MetricSet::mean_of(&folds),
            folds,
        })
        .collect();
    Ok(UserEvaluation {
        participant_id: unit.participant_id.clone(),
        condition: unit.condition,
        task,
        n_windows: data.len(),
        models,
        tuning,
    })
}

/// Evaluates every unit in order; failing units are recorded and skipped.
pub fn run_personal_experiment(units: &[UserData], task: Task, protocol: &Protocol) -> ExperimentOutcome {
    let mut out = ExperimentOutcome::default();
    for unit in units {
        match evaluate_user(unit, task, protocol) {
            Ok(e) => out.evaluations.push(e),
            Err(err) => out.skipped.push(skip_record(unit, task, &err)),
        }
    }
    out
}

pub fn skip_record(unit: &UserData, task: Task, err: &ExperimentError) -> SkipRecord {
    let reason = match err {
        ExperimentError::Tune(TuneError::TooFewPerClass { .. }) => {
            alloc::format!("TooFewPerClass: {err}")
        }
        other => other.to_string(),
    };
    SkipRecord {
        participant_id: unit.participant_id.clone(),
        condition: unit.condition,
        task,
        reason,
    }
}
