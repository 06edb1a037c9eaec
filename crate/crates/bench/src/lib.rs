//! Deterministic inputs for the benchmarks. Values come from a fixed
//! integer hash so no RNG dependency is needed.

use rsbench_core::extract::{PatchProvenance, PatchSet};
use rsbench_core::{FeatureMatrix, Label, RasterImage};

/// Pseudo-random value in [0, 1) for index `i`.
pub fn unit(i: usize) -> f32 {
    let mut x = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x ^= x >> 31;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 29;
    (x >> 40) as f32 / (1u64 << 24) as f32
}

/// A `c × size × size` image with reflectance-like values.
pub fn image(channels: usize, size: usize) -> RasterImage {
    let n = channels * size * size;
    RasterImage::new(channels, size, size, (0..n).map(|i| 0.3 * unit(i)).collect()).expect("valid image")
}

/// `rows × dim` features with labels cycling over `classes`.
pub fn features(rows: usize, dim: usize, classes: usize, offset: usize) -> FeatureMatrix {
    FeatureMatrix::new(
        dim,
        (0..rows * dim).map(|i| unit(i + offset)).collect(),
        (0..rows).map(|i| format!("r{i}")).collect(),
        (0..rows).map(|i| Label::Multiclass(i % classes)).collect(),
    )
    .expect("valid matrix")
}

pub fn patches(count: usize, dim: usize) -> PatchSet {
    let provenance = PatchProvenance {
        dataset: "bench".into(),
        seed: 0,
        count,
    };
    PatchSet::new(dim, (0..count * dim).map(unit).collect(), provenance).expect("valid patch set")
}
