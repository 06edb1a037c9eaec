//! Resize and normalization steps, and ordered pipelines of them.

mod normalize;
mod pipeline;
mod resize;

pub use normalize::{
    normalize, percentile, MinMaxScope, NormalizeSpec, IMAGENET_MEANS, IMAGENET_STDS,
};
pub use pipeline::{apply_pipeline, Pipeline, Step};
pub use resize::{resize_bilinear, ResizeSpec};

use crate::raster::RasterError;

#[derive(Debug, thiserror::Error)]
pub enum PreprocessError {
    #[error("bilinear resize of a masked raster is not supported")]
    MaskedResizeUnsupported,
    #[error("normalization statistics cover {stats} channels, image has {image}")]
    ChannelCountMismatch { stats: usize, image: usize },
    #[error("invalid preprocessing step: {0}")]
    InvalidSpec(String),
    #[error("percentile of an empty sequence")]
    EmptyInput,
    #[error("pipeline step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<PreprocessError>,
    },
    #[error(transparent)]
    Raster(#[from] RasterError),
}
