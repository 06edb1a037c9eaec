//! KNN evaluation of frozen embeddings: train-fit standardization, exact
//! neighbor search and the reported metrics.

mod knn;
mod metrics;
mod scaler;

use serde::{Deserialize, Serialize};

pub use knn::{knn_predict_multiclass, knn_scores_multilabel, threshold_scores, KnnModel, DEFAULT_K};
pub use metrics::{
    average_precision, macro_f1, mean_average_precision, micro_f1, overall_accuracy,
};
pub use scaler::{apply_scaler, fit_scaler, FeatureScaler};

use crate::extract::{ExtractError, FeatureMatrix};
use crate::manifest::{Label, Task};

/// Bumped whenever a tie-break rule changes, since results depend on it.
pub const TIE_POLICY_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("feature matrix has no rows")]
    EmptyMatrix,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("k={k} is invalid for {n} train rows")]
    InvalidK { k: usize, n: usize },
    #[error("expected {expected} labels, found {found}")]
    TaskMismatch { expected: Task, found: Task },
    #[error("matrix mixes multiclass and multilabel labels")]
    MixedTasks,
    #[error("prediction and truth shapes differ")]
    ShapeMismatch,
    #[error("length mismatch: {0} predictions, {1} labels")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("no class has a positive sample")]
    NoPositives,
    #[error(transparent)]
    Extract(#[from] ExtractError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub task: Task,
    pub k: usize,
    pub oa: Option<f64>,
    pub f1_micro: Option<f64>,
    pub f1_macro: Option<f64>,
    pub map: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
    pub d: usize,
    pub tie_policy_version: u32,
}

impl MetricReport {
    /// The headline number: OA for multiclass, micro-F1 for multilabel.
    pub fn primary(&self) -> Option<f64> {
        match self.task {
            Task::Multiclass => self.oa,
            Task::Multilabel => self.f1_micro,
        }
    }

    /// Look up a metric by its JSON field name.
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "oa" => self.oa,
            "f1" | "f1_micro" => self.f1_micro,
            "f1_macro" => self.f1_macro,
            "map" => self.map,
            _ => None,
        }
    }
}

/// Standardize with train statistics, fit KNN on train and score the test rows.
pub fn evaluate(train: &FeatureMatrix, test: &FeatureMatrix, k: usize) -> Result<MetricReport, EvalError> {
    let task = knn::task_of(train)?;
    let test_task = knn::task_of(test)?;
    if task != test_task {
        return Err(EvalError::TaskMismatch {
            expected: task,
            found: test_task,
        });
    }
    if test.dim() != train.dim() {
        return Err(EvalError::DimensionMismatch {
            expected: train.dim(),
            actual: test.dim(),
        });
    }
    let scaler = fit_scaler(train)?;
    let train_z = apply_scaler(&scaler, train)?;
    let test_z = apply_scaler(&scaler, test)?;
    let model = KnnModel::new(k, train_z)?;
    let mut report = MetricReport {
        task,
        k,
        oa: None,
        f1_micro: None,
        f1_macro: None,
        map: None,
        n_train: train.rows(),
        n_test: test.rows(),
        d: train.dim(),
        tie_policy_version: TIE_POLICY_VERSION,
    };
    match task {
        Task::Multiclass => {
            let pred = model.predict_multiclass(&test_z)?;
            let truth: Vec<usize> = test.labels().iter().filter_map(Label::class_index).collect();
            report.oa = Some(overall_accuracy(&pred, &truth)?);
            let k_classes = model
                .num_classes()
                .max(truth.iter().max().map_or(0, |c| c + 1));
            let one_hot = |v: &[usize]| -> Vec<Vec<bool>> {
                v.iter().map(|&c| (0..k_classes).map(|j| j == c).collect()).collect()
            };
            let (p, t) = (one_hot(&pred), one_hot(&truth));
            report.f1_micro = Some(micro_f1(&p, &t)?);
            report.f1_macro = Some(macro_f1(&p, &t)?);
        }
        Task::Multilabel => {
            let scores = model.scores_multilabel(&test_z)?;
            let truth: Vec<Vec<bool>> = test
                .labels()
                .iter()
                .map(|l| l.bits().map(<[bool]>::to_vec).unwrap_or_default())
                .collect();
            let pred = threshold_scores(&scores);
            report.f1_micro = Some(micro_f1(&pred, &truth)?);
            report.f1_macro = Some(macro_f1(&pred, &truth)?);
            report.map = Some(mean_average_precision(&scores, &truth)?);
        }
    }
    Ok(report)
}
