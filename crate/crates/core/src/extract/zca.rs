use nalgebra::{DMatrix, SymmetricEigen};

use super::{ExtractError, PatchSet};

/// ZCA whitening transform fitted to a patch set: `p ↦ W (p − mean)` with
/// `W = U diag(1/√(λ + ε)) Uᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZcaModel {
    mean: Vec<f64>,
    /// Row-major `dim × dim`.
    whitening: Vec<f64>,
    epsilon: f64,
}

/// How the ZCA regularizer is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZcaEpsilon {
    Absolute(f64),
    /// Multiple of the mean covariance eigenvalue.
    RelativeToMeanEigenvalue(f64),
}

impl Default for ZcaEpsilon {
    fn default() -> Self {
        ZcaEpsilon::RelativeToMeanEigenvalue(1e-6)
    }
}

impl ZcaModel {
    /// Builds a model from explicit parameters; `whitening` is row-major and
    /// must be symmetric.
    pub fn from_parts(mean: Vec<f64>, whitening: Vec<f64>, epsilon: f64) -> Result<Self, ExtractError> {
        let dim = mean.len();
        if whitening.len() != dim * dim {
            return Err(ExtractError::DimensionMismatch {
                expected: dim * dim,
                actual: whitening.len(),
            });
        }
        for i in 0..dim {
            for j in 0..i {
                if (whitening[i * dim + j] - whitening[j * dim + i]).abs() > 1e-8 {
                    return Err(ExtractError::InvalidModel("whitening matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self {
            mean,
            whitening,
            epsilon,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn whitening_matrix(&self) -> &[f64] {
        &self.whitening
    }

    /// Effective absolute ε used in the fit.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn whiten(&self, patch: &[f32]) -> Result<Vec<f32>, ExtractError> {
        let dim = self.dim();
        if patch.len() != dim {
            return Err(ExtractError::DimensionMismatch {
                expected: dim,
                actual: patch.len(),
            });
        }
        let centered: Vec<f64> = patch
            .iter()
            .zip(&self.mean)
            .map(|(&p, m)| f64::from(p) - m)
            .collect();
        Ok(self
            .whitening
            .chunks_exact(dim)
            .map(|row| row.iter().zip(&centered).map(|(w, c)| w * c).sum::<f64>() as f32)
            .collect())
    }
}

/// Column mean and divide-by-N covariance of a patch set.
fn moments(patches: &PatchSet) -> (Vec<f64>, DMatrix<f64>) {
    let dim = patches.dim();
    let n = patches.len() as f64;
    let mut mean = vec![0.0f64; dim];
    for p in patches.iter() {
        for (m, &v) in mean.iter_mut().zip(p) {
            *m += f64::from(v);
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut cov = vec![0.0f64; dim * dim];
    let mut centered = vec![0.0f64; dim];
    for p in patches.iter() {
        for ((c, &v), m) in centered.iter_mut().zip(p).zip(&mean) {
            *c = f64::from(v) - m;
        }
        for i in 0..dim {
            let ci = centered[i];
            let row = &mut cov[i * dim..i * dim + i + 1];
            for (j, slot) in row.iter_mut().enumerate() {
                *slot += ci * centered[j];
            }
        }
    }
    let mut sigma = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..=i {
            let v = cov[i * dim + j] / n;
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    (mean, sigma)
}

pub fn zca_fit(patches: &PatchSet, epsilon: ZcaEpsilon) -> Result<ZcaModel, ExtractError> {
    let dim = patches.dim();
    if patches.len() < dim {
        return Err(ExtractError::InsufficientPatches {
            have: patches.len(),
            dim,
        });
    }
    let (mean, sigma) = moments(patches);
    let eigen = SymmetricEigen::new(sigma);
    let eigenvalues: Vec<f64> = eigen.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let largest = eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let eps = match epsilon {
        ZcaEpsilon::Absolute(e) => e,
        ZcaEpsilon::RelativeToMeanEigenvalue(r) => r * eigenvalues.iter().sum::<f64>() / dim as f64,
    };
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(ExtractError::InvalidModel(format!("epsilon {eps} must be >= 0")));
    }
    if eps == 0.0 {
        let tolerance = largest.max(f64::MIN_POSITIVE) * 1e-10;
        if let Some(&smallest) = eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
            if smallest <= tolerance {
                return Err(ExtractError::SingularCovariance { eigenvalue: smallest });
            }
        }
    }
    let u = &eigen.eigenvectors;
    let scale: Vec<f64> = eigenvalues.iter().map(|l| 1.0 / (l + eps).sqrt()).collect();
    let mut whitening = vec![0.0f64; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let v: f64 = (0..dim).map(|m| u[(i, m)] * scale[m] * u[(j, m)]).sum();
            whitening[i * dim + j] = v;
            whitening[j * dim + i] = v;
        }
    }
    if whitening.iter().any(|v| !v.is_finite()) {
        return Err(ExtractError::InvalidModel("whitening matrix is not finite".into()));
    }
    Ok(ZcaModel {
        mean,
        whitening,
        epsilon: eps,
    })
}

pub fn zca_apply(model: &ZcaModel, patches: &PatchSet) -> Result<PatchSet, ExtractError> {
    if patches.dim() != model.dim() {
        return Err(ExtractError::DimensionMismatch {
            expected: model.dim(),
            actual: patches.dim(),
        });
    }
    let mut data = Vec::with_capacity(patches.data().len());
    for p in patches.iter() {
        data.extend(model.whiten(p)?);
    }
    PatchSet::new(patches.dim(), data, patches.provenance.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::PatchProvenance;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn set(dim: usize, data: Vec<f32>) -> PatchSet {
        let count = data.len() / dim;
        PatchSet::new(
            dim,
            data,
            PatchProvenance {
                dataset: "t".into(),
                seed: 0,
                count,
            },
        )
        .unwrap()
    }

    #[test]
    fn diagonal_covariance_closed_form() {
        // (±2, 0), (0, ±1): mean 0, Σ = diag(8/4, 2/4) = diag(2, 0.5)
        let data = vec![2.0, 0.0, -2.0, 0.0, 0.0, 1.0, 0.0, -1.0];
        let model = zca_fit(&set(2, data), ZcaEpsilon::Absolute(0.0)).unwrap();
        let w = model.whitening_matrix();
        assert!((w[0] - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((w[3] - 2f64.sqrt()).abs() < 1e-12);
        assert!(w[1].abs() < 1e-12 && w[2].abs() < 1e-12);
    }

    #[test]
    fn white_data_gives_near_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dim = 4;
        let data: Vec<f32> = (0..dim * 40_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let model = zca_fit(&set(dim, data), ZcaEpsilon::Absolute(0.0)).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((model.whitening_matrix()[i * dim + j] - expected).abs() < 0.03);
            }
        }
    }

    #[test]
    fn rank_deficient_is_singular() {
        // second coordinate is always twice the first
        let data: Vec<f32> = (0..20).flat_map(|i| [i as f32, 2.0 * i as f32]).collect();
        assert!(matches!(
            zca_fit(&set(2, data.clone()), ZcaEpsilon::Absolute(0.0)),
            Err(ExtractError::SingularCovariance { .. })
        ));
        assert!(zca_fit(&set(2, data), ZcaEpsilon::Absolute(1e-3)).is_ok());
    }

    #[test]
    fn mean_maps_to_zero_and_identity_is_identity() {
        let data: Vec<f32> = vec![1.0, 2.0, 3.0, 5.0, -1.0, 0.5];
        let model = zca_fit(&set(2, data), ZcaEpsilon::Absolute(0.0)).unwrap();
        let mean: Vec<f32> = model.mean().iter().map(|&m| m as f32).collect();
        assert!(model.whiten(&mean).unwrap().iter().all(|v| v.abs() < 1e-6));

        let identity = ZcaModel::from_parts(vec![0.0; 2], vec![1.0, 0.0, 0.0, 1.0], 0.0).unwrap();
        let p = set(2, vec![3.5, -2.0, 1.0, 9.0]);
        assert_eq!(zca_apply(&identity, &p).unwrap().data(), p.data());
        assert!(matches!(
            zca_apply(&identity, &set(3, vec![0.0; 3])),
            Err(ExtractError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn too_few_patches() {
        assert!(matches!(
            zca_fit(&set(3, vec![1.0, 2.0, 3.0]), ZcaEpsilon::default()),
            Err(ExtractError::InsufficientPatches { have: 1, dim: 3 })
        ));
    }
}
