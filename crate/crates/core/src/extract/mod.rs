//! Feature extractors: per-band image statistics, random convolutional
//! features with random or ZCA-whitened-patch filters, and import of
//! externally computed embeddings.

mod features;
mod patches;
mod rcf;
mod stats;
mod zca;

use std::path::{Path, PathBuf};

pub use features::{
    export_embeddings, extract_features, import_embeddings, read_embedding_files,
    read_embeddings_csv, write_embeddings_csv, Extractor, FeatureMatrix, EMBEDDING_MAGIC,
};
pub use patches::{sample_patches, sample_patches_with, PatchProvenance, PatchSet};
pub use rcf::{rcf_extract, rcf_init_empirical, rcf_init_random, InitMode, RcfBank, RCF_MAGIC};
pub use stats::image_statistics;
pub use zca::{zca_apply, zca_fit, ZcaEpsilon, ZcaModel};

use crate::manifest::Sample;
use crate::preprocess::{apply_pipeline, Pipeline, PreprocessError};
use crate::raster::{load_raster, select_bands, RasterError, RasterImage};

pub const DEFAULT_FEATURES: usize = 512;
pub const DEFAULT_KERNEL: usize = 3;

/// Candidate patches drawn per feature when fitting empirical filters.
pub const PATCHES_PER_FEATURE: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("band {0} has no unmasked pixels")]
    AllMaskedChannel(usize),
    #[error("image {height}x{width} is smaller than the {kernel}x{kernel} kernel")]
    ImageTooSmall {
        height: usize,
        width: usize,
        kernel: usize,
    },
    #[error("train split is empty")]
    EmptyTrainSplit,
    #[error("no samples match the split filter")]
    EmptySelection,
    #[error("feature count {0} must be even and >= 2")]
    OddFeatureCount(usize),
    #[error("kernel size {0} must be odd and >= 1")]
    InvalidKernel(usize),
    #[error("need {need} patches, have {have}")]
    NotEnoughPatches { need: usize, have: usize },
    #[error("whitening needs at least {dim} patches, have {have}")]
    InsufficientPatches { have: usize, dim: usize },
    #[error("patch covariance is singular (eigenvalue {eigenvalue:e}) and epsilon is 0")]
    SingularCovariance { eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("filter bank expects {bank} channels, image has {image}")]
    ChannelMismatch { bank: usize, image: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("embedding id {0:?} not found in manifest")]
    UnknownId(String),
    #[error("inconsistent dimensions: {0}")]
    DimensionInconsistent(String),
    #[error("{0}: bad magic header")]
    MagicMismatch(PathBuf),
    #[error("sample {id}: {source}")]
    Sample {
        id: String,
        #[source]
        source: Box<ExtractError>,
    },
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error("io failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ExtractError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ExtractError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Decode, select bands, then run the pipeline.
pub fn load_prepared(
    sample: &Sample,
    bands: Option<&[usize]>,
    pipeline: &Pipeline,
) -> Result<RasterImage, ExtractError> {
    let image = load_raster(&sample.image_path, None)?;
    let image = match bands {
        Some(indices) => select_bands(&image, indices)?,
        None => image,
    };
    Ok(apply_pipeline(&image, pipeline)?)
}
