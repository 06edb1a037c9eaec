use rand::Rng;
use rayon::prelude::*;

use super::{load_prepared, ExtractError};
use crate::manifest::{DatasetManifest, Split};
use crate::preprocess::Pipeline;
use crate::raster::RasterImage;
use crate::rng::{seeded, STREAM_PATCH_POSITIONS};

/// Where a patch set came from.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchProvenance {
    pub dataset: String,
    pub seed: u64,
    pub count: usize,
}

/// `N` flattened `c × k × k` windows, stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSet {
    dim: usize,
    data: Vec<f32>,
    pub provenance: PatchProvenance,
}

impl PatchSet {
    pub fn new(dim: usize, data: Vec<f32>, provenance: PatchProvenance) -> Result<Self, ExtractError> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(ExtractError::DimensionMismatch {
                expected: dim,
                actual: data.len(),
            });
        }
        Ok(Self {
            dim,
            data,
            provenance,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn patch(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// A patch location drawn before any image is read: image index plus unit
/// coordinates that are scaled to the image's valid window range later.
#[derive(Debug, Clone, Copy)]
struct Draw {
    image: usize,
    u_row: f64,
    u_col: f64,
}

fn window(image: &RasterImage, kernel: usize, draw: &Draw, out: &mut Vec<f32>) {
    let rows = image.height() - kernel + 1;
    let cols = image.width() - kernel + 1;
    let r0 = ((draw.u_row * rows as f64) as usize).min(rows - 1);
    let c0 = ((draw.u_col * cols as f64) as usize).min(cols - 1);
    for band in 0..image.channels() {
        let plane = image.band(band);
        for dy in 0..kernel {
            let start = (r0 + dy) * image.width() + c0;
            out.extend_from_slice(&plane[start..start + kernel]);
        }
    }
}

/// Core sampler over an indexed image source. All positions are drawn from
/// one seeded stream up front, so the result does not depend on how images
/// are loaded.
pub fn sample_patches_with<F>(
    n_images: usize,
    load: F,
    kernel: usize,
    n_patches: usize,
    seed: u64,
    dataset: &str,
) -> Result<PatchSet, ExtractError>
where
    F: Fn(usize) -> Result<RasterImage, ExtractError> + Sync,
{
    if n_images == 0 {
        return Err(ExtractError::EmptyTrainSplit);
    }
    if kernel == 0 || kernel % 2 == 0 {
        return Err(ExtractError::InvalidKernel(kernel));
    }
    let mut rng = seeded(seed, STREAM_PATCH_POSITIONS);
    let draws: Vec<Draw> = (0..n_patches)
        .map(|_| Draw {
            image: rng.random_range(0..n_images),
            u_row: rng.random::<f64>(),
            u_col: rng.random::<f64>(),
        })
        .collect();

    let mut by_image: Vec<Vec<usize>> = vec![Vec::new(); n_images];
    for (i, d) in draws.iter().enumerate() {
        by_image[d.image].push(i);
    }
    let needed: Vec<usize> = (0..n_images).filter(|&i| !by_image[i].is_empty()).collect();

    // (patch index, flattened window) for every patch, grouped per image.
    let chunks: Vec<Vec<(usize, Vec<f32>)>> = needed
        .par_iter()
        .map(|&img_idx| {
            let image = load(img_idx)?;
            if image.height() < kernel || image.width() < kernel {
                return Err(ExtractError::ImageTooSmall {
                    height: image.height(),
                    width: image.width(),
                    kernel,
                });
            }
            Ok(by_image[img_idx]
                .iter()
                .map(|&p| {
                    let mut buf = Vec::with_capacity(image.channels() * kernel * kernel);
                    window(&image, kernel, &draws[p], &mut buf);
                    (p, buf)
                })
                .collect())
        })
        .collect::<Result<_, _>>()?;

    let mut ordered: Vec<Option<Vec<f32>>> = vec![None; n_patches];
    for (p, buf) in chunks.into_iter().flatten() {
        ordered[p] = Some(buf);
    }
    let mut dim = 0;
    let mut data = Vec::new();
    for buf in ordered.into_iter().flatten() {
        if dim == 0 {
            dim = buf.len();
        } else if buf.len() != dim {
            return Err(ExtractError::DimensionMismatch {
                expected: dim,
                actual: buf.len(),
            });
        }
        data.extend(buf);
    }
    PatchSet::new(
        dim.max(1),
        data,
        PatchProvenance {
            dataset: dataset.to_string(),
            seed,
            count: n_patches,
        },
    )
}

/// Samples `n_patches` random `k × k` windows from the train split after
/// band selection and preprocessing.
pub fn sample_patches(
    manifest: &DatasetManifest,
    bands: Option<&[usize]>,
    pipeline: &Pipeline,
    kernel: usize,
    n_patches: usize,
    seed: u64,
) -> Result<PatchSet, ExtractError> {
    let train: Vec<_> = manifest.split(Split::Train).collect();
    sample_patches_with(
        train.len(),
        |i| {
            load_prepared(train[i], bands, pipeline).map_err(|e| ExtractError::Sample {
                id: train[i].id.clone(),
                source: Box::new(e),
            })
        },
        kernel,
        n_patches,
        seed,
        &manifest.name,
    )
}
