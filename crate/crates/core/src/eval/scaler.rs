use super::EvalError;
use crate::extract::FeatureMatrix;

/// Columns with a population std below this are treated as constant.
const CONSTANT_STD: f64 = 10.0 * f64::EPSILON;

/// Per-dimension standardization fitted on training features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    pub means: Vec<f64>,
    /// Always > 0; constant columns get 1.
    pub stds: Vec<f64>,
}

impl FeatureScaler {
    pub fn identity(dim: usize) -> Self {
        Self {
            means: vec![0.0; dim],
            stds: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }
}

pub fn fit_scaler(train: &FeatureMatrix) -> Result<FeatureScaler, EvalError> {
    let n = train.rows();
    if n == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let d = train.dim();
    let mut means = vec![0.0f64; d];
    for i in 0..n {
        for (m, &v) in means.iter_mut().zip(train.row(i)) {
            *m += f64::from(v);
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);
    let mut vars = vec![0.0f64; d];
    for i in 0..n {
        for ((s, &v), m) in vars.iter_mut().zip(train.row(i)).zip(&means) {
            let dv = f64::from(v) - m;
            *s += dv * dv;
        }
    }
    let stds = vars
        .into_iter()
        .map(|s| {
            let std = (s / n as f64).sqrt();
            if std < CONSTANT_STD {
                1.0
            } else {
                std
            }
        })
        .collect();
    Ok(FeatureScaler { means, stds })
}

pub fn apply_scaler(scaler: &FeatureScaler, m: &FeatureMatrix) -> Result<FeatureMatrix, EvalError> {
    if m.dim() != scaler.dim() {
        return Err(EvalError::DimensionMismatch {
            expected: scaler.dim(),
            actual: m.dim(),
        });
    }
    let d = m.dim();
    let values = m
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let j = i % d;
            ((f64::from(v) - scaler.means[j]) / scaler.stds[j]) as f32
        })
        .collect();
    Ok(m.with_values(values)?)
}
