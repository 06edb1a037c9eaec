//! Random convolutional features.
//!
//! A bank holds `F/2` filters of shape `c × k × k`. Extraction correlates
//! each filter with the image (stride 1, no padding), applies `max(r, 0)`
//! and `max(−r, 0)` and mean-pools both maps spatially, giving `F` values
//! ordered `[pos₀, neg₀, pos₁, neg₁, …]`.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use super::{ExtractError, PatchSet, ZcaModel};
use crate::raster::RasterImage;
use crate::rng::{seeded, STREAM_PATCH_SELECTION, STREAM_RCF_WEIGHTS};

pub const RCF_MAGIC: &[u8; 6] = b"RSRCF1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Random,
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RcfBank {
    num_features: usize,
    kernel_size: usize,
    in_channels: usize,
    /// `F/2` filters, each `c·k·k` values in (band, row, col) order.
    weights: Vec<f32>,
    biases: Vec<f32>,
    seed: u64,
    init_mode: InitMode,
}

fn check_shape(features: usize, kernel: usize, channels: usize) -> Result<(), ExtractError> {
    if features < 2 || features % 2 != 0 {
        return Err(ExtractError::OddFeatureCount(features));
    }
    if kernel == 0 || kernel % 2 == 0 {
        return Err(ExtractError::InvalidKernel(kernel));
    }
    if channels == 0 {
        return Err(ExtractError::InvalidModel("bank needs at least one input channel".into()));
    }
    Ok(())
}

impl RcfBank {
    pub fn from_parts(
        num_features: usize,
        kernel_size: usize,
        in_channels: usize,
        weights: Vec<f32>,
        biases: Vec<f32>,
        seed: u64,
        init_mode: InitMode,
    ) -> Result<Self, ExtractError> {
        check_shape(num_features, kernel_size, in_channels)?;
        let filters = num_features / 2;
        let dim = in_channels * kernel_size * kernel_size;
        if weights.len() != filters * dim {
            return Err(ExtractError::DimensionMismatch {
                expected: filters * dim,
                actual: weights.len(),
            });
        }
        if biases.len() != filters {
            return Err(ExtractError::DimensionMismatch {
                expected: filters,
                actual: biases.len(),
            });
        }
        if weights.iter().chain(&biases).any(|v| !v.is_finite()) {
            return Err(ExtractError::InvalidModel("filter bank has non-finite entries".into()));
        }
        Ok(Self {
            num_features,
            kernel_size,
            in_channels,
            weights,
            biases,
            seed,
            init_mode,
        })
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_filters(&self) -> usize {
        self.num_features / 2
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel_size
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn filter_dim(&self) -> usize {
        self.in_channels * self.kernel_size * self.kernel_size
    }

    pub fn filter(&self, i: usize) -> &[f32] {
        let dim = self.filter_dim();
        &self.weights[i * dim..(i + 1) * dim]
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn biases(&self) -> &[f32] {
        &self.biases
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn init_mode(&self) -> InitMode {
        self.init_mode
    }

    /// Replaces every bias with `value`.
    pub fn with_bias(mut self, value: f32) -> Self {
        self.biases.iter_mut().for_each(|b| *b = value);
        self
    }

    pub fn save(&self, path: &Path) -> Result<(), ExtractError> {
        let mut buf = Vec::with_capacity(33 + 4 * (self.weights.len() + self.biases.len()));
        buf.extend_from_slice(RCF_MAGIC);
        buf.extend_from_slice(&(self.num_features as u32).to_le_bytes());
        buf.extend_from_slice(&(self.in_channels as u32).to_le_bytes());
        buf.extend_from_slice(&(self.kernel_size as u32).to_le_bytes());
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.push(match self.init_mode {
            InitMode::Random => 0,
            InitMode::Empirical => 1,
        });
        for v in self.weights.iter().chain(&self.biases) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut file = std::fs::File::create(path).map_err(|e| ExtractError::io(path, e))?;
        file.write_all(&buf).map_err(|e| ExtractError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, ExtractError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| ExtractError::io(path, e))?;
        let header = RCF_MAGIC.len() + 12 + 8 + 1;
        if bytes.len() < header || &bytes[..RCF_MAGIC.len()] != RCF_MAGIC {
            return Err(ExtractError::MagicMismatch(path.to_path_buf()));
        }
        let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
        let features = u32_at(6);
        let channels = u32_at(10);
        let kernel = u32_at(14);
        let seed = u64::from_le_bytes(bytes[18..26].try_into().unwrap());
        let init_mode = match bytes[26] {
            0 => InitMode::Random,
            1 => InitMode::Empirical,
            other => {
                return Err(ExtractError::InvalidModel(format!("unknown init mode {other}")))
            }
        };
        let filters = features / 2;
        let n_weights = filters * channels * kernel * kernel;
        if bytes.len() != header + 4 * (n_weights + filters) {
            return Err(ExtractError::DimensionInconsistent(format!(
                "{}: payload does not match F={features}, c={channels}, k={kernel}",
                path.display()
            )));
        }
        let values: Vec<f32> = bytes[header..]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        let (weights, biases) = values.split_at(n_weights);
        Self::from_parts(
            features,
            kernel,
            channels,
            weights.to_vec(),
            biases.to_vec(),
            seed,
            init_mode,
        )
    }
}

/// `F/2` filters with i.i.d. standard-normal entries, zero biases.
pub fn rcf_init_random(
    channels: usize,
    features: usize,
    kernel: usize,
    seed: u64,
) -> Result<RcfBank, ExtractError> {
    check_shape(features, kernel, channels)?;
    let mut rng = seeded(seed, STREAM_RCF_WEIGHTS);
    let n = features / 2 * channels * kernel * kernel;
    let weights: Vec<f32> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    RcfBank::from_parts(
        features,
        kernel,
        channels,
        weights,
        vec![0.0; features / 2],
        seed,
        InitMode::Random,
    )
}

/// Filters are `F/2` patches drawn without replacement and ZCA-whitened.
pub fn rcf_init_empirical(
    patches: &PatchSet,
    zca: &ZcaModel,
    channels: usize,
    features: usize,
    seed: u64,
) -> Result<RcfBank, ExtractError> {
    if features < 2 || features % 2 != 0 {
        return Err(ExtractError::OddFeatureCount(features));
    }
    let filters = features / 2;
    if patches.len() < filters {
        return Err(ExtractError::NotEnoughPatches {
            need: filters,
            have: patches.len(),
        });
    }
    let dim = patches.dim();
    if channels == 0 || dim % channels != 0 {
        return Err(ExtractError::DimensionMismatch {
            expected: channels,
            actual: dim,
        });
    }
    let kernel = ((dim / channels) as f64).sqrt().round() as usize;
    if kernel * kernel * channels != dim {
        return Err(ExtractError::InvalidModel(format!(
            "patch dimension {dim} is not {channels}·k·k"
        )));
    }
    let mut rng = seeded(seed, STREAM_PATCH_SELECTION);
    let chosen = index::sample(&mut rng, patches.len(), filters);
    let mut weights = Vec::with_capacity(filters * dim);
    for i in chosen.iter() {
        weights.extend(zca.whiten(patches.patch(i))?);
    }
    RcfBank::from_parts(
        features,
        kernel,
        channels,
        weights,
        vec![0.0; filters],
        seed,
        InitMode::Empirical,
    )
}

/// Output positions per GEMM block.
const BLOCK_POSITIONS: usize = 2048;

pub fn rcf_extract(image: &RasterImage, bank: &RcfBank) -> Result<Vec<f32>, ExtractError> {
    let k = bank.kernel_size;
    if image.channels() != bank.in_channels {
        return Err(ExtractError::ChannelMismatch {
            bank: bank.in_channels,
            image: image.channels(),
        });
    }
    if image.height() < k || image.width() < k {
        return Err(ExtractError::ImageTooSmall {
            height: image.height(),
            width: image.width(),
            kernel: k,
        });
    }
    let out_h = image.height() - k + 1;
    let out_w = image.width() - k + 1;
    let positions = out_h * out_w;
    let dim = bank.filter_dim();
    let filters = bank.num_filters();
    let w = image.width();

    let rows_per_block = (BLOCK_POSITIONS / out_w).max(1);
    let mut cols = vec![0.0f32; rows_per_block * out_w * dim];
    let mut responses = vec![0.0f32; rows_per_block * out_w * filters];
    let mut pos_sum = vec![0.0f64; filters];
    let mut neg_sum = vec![0.0f64; filters];

    let mut row0 = 0;
    while row0 < out_h {
        let rows = rows_per_block.min(out_h - row0);
        let m = rows * out_w;
        // im2col: one row per output position, columns in filter layout
        for r in 0..rows {
            for x in 0..out_w {
                let dst = &mut cols[(r * out_w + x) * dim..(r * out_w + x + 1) * dim];
                let mut at = 0;
                for band in 0..image.channels() {
                    let plane = image.band(band);
                    for dy in 0..k {
                        let start = (row0 + r + dy) * w + x;
                        dst[at..at + k].copy_from_slice(&plane[start..start + k]);
                        at += k;
                    }
                }
            }
        }
        // responses[m × filters] = cols[m × dim] · weightsᵀ[dim × filters]
        // SAFETY: buffer extents match the dimensions and strides passed.
        unsafe {
            matrixmultiply::sgemm(
                m,
                dim,
                filters,
                1.0,
                cols.as_ptr(),
                dim as isize,
                1,
                bank.weights.as_ptr(),
                1,
                dim as isize,
                0.0,
                responses.as_mut_ptr(),
                filters as isize,
                1,
            );
        }
        for resp in responses[..m * filters].chunks_exact(filters) {
            for (f, &r) in resp.iter().enumerate() {
                let r = r + bank.biases[f];
                if r > 0.0 {
                    pos_sum[f] += f64::from(r);
                } else {
                    neg_sum[f] -= f64::from(r);
                }
            }
        }
        row0 += rows;
    }

    let n = positions as f64;
    let mut out = Vec::with_capacity(bank.num_features);
    for f in 0..filters {
        out.push((pos_sum[f] / n) as f32);
        out.push((neg_sum[f] / n) as f32);
    }
    Ok(out)
}
