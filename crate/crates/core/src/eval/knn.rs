//! Exhaustive k-nearest-neighbor search with deterministic tie-breaks.
//!
//! Distances are squared Euclidean accumulated in `f64`. Equal distances are
//! ordered by train-row index; equal vote counts resolve to the lowest class
//! index.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::EvalError;
use crate::extract::FeatureMatrix;
use crate::manifest::{Label, Task};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone)]
pub struct KnnModel {
    k: usize,
    train: FeatureMatrix,
    task: Task,
    num_classes: usize,
}

fn matrix_task(m: &FeatureMatrix) -> Result<Option<Task>, EvalError> {
    let mut task = None;
    for l in m.labels() {
        match task {
            None => task = Some(l.task()),
            Some(t) if t != l.task() => return Err(EvalError::MixedTasks),
            _ => {}
        }
    }
    Ok(task)
}

pub(crate) fn task_of(m: &FeatureMatrix) -> Result<Task, EvalError> {
    matrix_task(m)?.ok_or(EvalError::EmptyMatrix)
}

impl KnnModel {
    pub fn new(k: usize, train: FeatureMatrix) -> Result<Self, EvalError> {
        let n = train.rows();
        if k == 0 || k > n {
            return Err(EvalError::InvalidK { k, n });
        }
        let task = task_of(&train)?;
        let num_classes = match task {
            Task::Multiclass => train
                .labels()
                .iter()
                .filter_map(Label::class_index)
                .max()
                .map_or(0, |c| c + 1),
            Task::Multilabel => train.labels()[0].bits().map_or(0, <[bool]>::len),
        };
        if task == Task::Multilabel
            && train
                .labels()
                .iter()
                .any(|l| l.bits().map_or(0, <[bool]>::len) != num_classes)
        {
            return Err(EvalError::ShapeMismatch);
        }
        Ok(Self {
            k,
            train,
            task,
            num_classes,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn train(&self) -> &FeatureMatrix {
        &self.train
    }

    fn check_queries(&self, queries: &FeatureMatrix) -> Result<(), EvalError> {
        if queries.dim() != self.train.dim() {
            return Err(EvalError::DimensionMismatch {
                expected: self.train.dim(),
                actual: queries.dim(),
            });
        }
        Ok(())
    }

    /// Indices of the `k` nearest train rows, nearest first.
    pub fn neighbors(&self, query: &[f32]) -> Vec<usize> {
        let mut dists: Vec<(f64, usize)> = (0..self.train.rows())
            .map(|i| (squared_distance(query, self.train.row(i)), i))
            .collect();
        let by_key = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if self.k < dists.len() {
            dists.select_nth_unstable_by(self.k - 1, by_key);
            dists.truncate(self.k);
        }
        dists.sort_unstable_by(by_key);
        dists.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_multiclass(&self, queries: &FeatureMatrix) -> Result<Vec<usize>, EvalError> {
        if self.task != Task::Multiclass {
            return Err(EvalError::TaskMismatch {
                expected: Task::Multiclass,
                found: self.task,
            });
        }
        self.check_queries(queries)?;
        Ok((0..queries.rows())
            .into_par_iter()
            .map(|q| {
                let mut votes = vec![0usize; self.num_classes];
                for i in self.neighbors(queries.row(q)) {
                    if let Label::Multiclass(c) = self.train.labels()[i] {
                        votes[c] += 1;
                    }
                }
                // max_by_key keeps the last maximum, so scan in reverse
                votes
                    .iter()
                    .enumerate()
                    .rev()
                    .max_by_key(|(_, &v)| v)
                    .map_or(0, |(c, _)| c)
            })
            .collect())
    }

    /// Per-class fraction of the `k` neighbors carrying that label.
    pub fn scores_multilabel(&self, queries: &FeatureMatrix) -> Result<Vec<Vec<f64>>, EvalError> {
        if self.task != Task::Multilabel {
            return Err(EvalError::TaskMismatch {
                expected: Task::Multilabel,
                found: self.task,
            });
        }
        self.check_queries(queries)?;
        Ok((0..queries.rows())
            .into_par_iter()
            .map(|q| {
                let mut counts = vec![0usize; self.num_classes];
                for i in self.neighbors(queries.row(q)) {
                    if let Label::Multilabel(bits) = &self.train.labels()[i] {
                        for (c, &b) in counts.iter_mut().zip(bits) {
                            *c += usize::from(b);
                        }
                    }
                }
                counts
                    .into_iter()
                    .map(|c| c as f64 / self.k as f64)
                    .collect()
            })
            .collect())
    }
}

fn squared_distance(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum()
}

/// Positive iff the score is at least one half.
pub fn threshold_scores(scores: &[Vec<f64>]) -> Vec<Vec<bool>> {
    scores
        .iter()
        .map(|row| row.iter().map(|&s| s >= 0.5).collect())
        .collect()
}

pub fn knn_predict_multiclass(model: &KnnModel, queries: &FeatureMatrix) -> Result<Vec<usize>, EvalError> {
    model.predict_multiclass(queries)
}

pub fn knn_scores_multilabel(model: &KnnModel, queries: &FeatureMatrix) -> Result<Vec<Vec<f64>>, EvalError> {
    model.scores_multilabel(queries)
}
