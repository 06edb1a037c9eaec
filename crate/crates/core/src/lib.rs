//! Baseline feature extractors, preprocessing and KNN evaluation for
//! remote-sensing scene classification benchmarks.

pub mod bench;
pub mod datasets;
pub mod eval;
pub mod extract;
pub mod manifest;
pub mod preprocess;
pub mod raster;
mod rng;

pub use eval::{evaluate, MetricReport};
pub use extract::FeatureMatrix;
pub use manifest::{DatasetManifest, Label, Sample, Split, Task};
pub use preprocess::{Pipeline, Step};
pub use raster::RasterImage;
