//! Canonical in-memory raster representation and decoding.
//!
//! Every image entering the toolkit is turned into a [`RasterImage`]: a
//! channel-major `f32` tensor holding the raw digital numbers of the source
//! file. No rescaling happens at decode time; normalization is an explicit
//! preprocessing step.

mod decode;
mod raw;

use std::path::PathBuf;

pub use decode::{load_raster, RasterFormat};
pub use raw::{save_raster, RAW_MAGIC};

#[derive(Debug, thiserror::Error)]
pub enum RasterError {
    #[error("unsupported raster format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt raster file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },
    #[error("raster has zero bands")]
    BandCountZero,
    #[error("invalid raster shape {channels}x{height}x{width}")]
    InvalidShape {
        channels: usize,
        height: usize,
        width: usize,
    },
    #[error("data length {actual} does not match shape (expected {expected})")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite value at band {band}, offset {offset}")]
    NonFinite { band: usize, offset: usize },
    #[error("band index {index} out of range for {channels}-band image")]
    IndexOutOfRange { index: usize, channels: usize },
    #[error("band selection is empty")]
    EmptyBandSelection,
    #[error("{0} band names given for {1} bands")]
    BandNameCount(usize, usize),
    #[error("nodata mask has {actual} entries, expected {expected}")]
    MaskShape { expected: usize, actual: usize },
    #[error("io failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A `c × h × w` float tensor in (band, row, col) order.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
    band_names: Option<Vec<String>>,
    nodata_mask: Option<Vec<bool>>,
    source_bit_depth: Option<u8>,
}

impl RasterImage {
    /// Builds an image from channel-major data. Fails on zero dimensions,
    /// a length mismatch or any non-finite value.
    pub fn new(
        channels: usize,
        height: usize,
        width: usize,
        data: Vec<f32>,
    ) -> Result<Self, RasterError> {
        Self::with_mask(channels, height, width, data, None)
    }

    /// Like [`RasterImage::new`], with an optional per-pixel nodata mask
    /// (`true` = masked). Masked pixels are exempt from the finiteness check
    /// and are stored as `0.0`.
    pub fn with_mask(
        channels: usize,
        height: usize,
        width: usize,
        mut data: Vec<f32>,
        nodata_mask: Option<Vec<bool>>,
    ) -> Result<Self, RasterError> {
        if channels == 0 {
            return Err(RasterError::BandCountZero);
        }
        if height == 0 || width == 0 {
            return Err(RasterError::InvalidShape {
                channels,
                height,
                width,
            });
        }
        let plane = height * width;
        let expected = channels * plane;
        if data.len() != expected {
            return Err(RasterError::LengthMismatch {
                expected,
                actual: data.len(),
            });
        }
        if let Some(mask) = &nodata_mask {
            if mask.len() != plane {
                return Err(RasterError::MaskShape {
                    expected: plane,
                    actual: mask.len(),
                });
            }
        }
        for (band, values) in data.chunks_mut(plane).enumerate() {
            for (offset, v) in values.iter_mut().enumerate() {
                let masked = nodata_mask.as_ref().is_some_and(|m| m[offset]);
                if masked {
                    *v = 0.0;
                } else if !v.is_finite() {
                    return Err(RasterError::NonFinite { band, offset });
                }
            }
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
            band_names: None,
            nodata_mask,
            source_bit_depth: None,
        })
    }

    pub fn with_band_names(mut self, names: Vec<String>) -> Result<Self, RasterError> {
        if names.len() != self.channels {
            return Err(RasterError::BandNameCount(names.len(), self.channels));
        }
        self.band_names = Some(names);
        Ok(self)
    }

    pub fn with_source_bit_depth(mut self, bits: u8) -> Self {
        self.source_bit_depth = Some(bits);
        self
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn band_names(&self) -> Option<&[String]> {
        self.band_names.as_deref()
    }

    pub fn nodata_mask(&self) -> Option<&[bool]> {
        self.nodata_mask.as_deref()
    }

    pub fn source_bit_depth(&self) -> Option<u8> {
        self.source_bit_depth
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    /// Pixel values of one band, row-major.
    pub fn band(&self, index: usize) -> &[f32] {
        let plane = self.plane_len();
        &self.data[index * plane..(index + 1) * plane]
    }

    pub fn is_masked(&self, offset: usize) -> bool {
        self.nodata_mask.as_ref().is_some_and(|m| m[offset])
    }

    /// Replaces the pixel data while keeping band metadata and mask.
    /// Used by value-wise operations that preserve shape.
    pub(crate) fn map_data(&self, data: Vec<f32>) -> Result<Self, RasterError> {
        let mut out = Self::with_mask(
            self.channels,
            self.height,
            self.width,
            data,
            self.nodata_mask.clone(),
        )?;
        out.band_names = self.band_names.clone();
        out.source_bit_depth = self.source_bit_depth;
        Ok(out)
    }

    pub(crate) fn resized_from(
        &self,
        height: usize,
        width: usize,
        data: Vec<f32>,
    ) -> Result<Self, RasterError> {
        let mut out = Self::new(self.channels, height, width, data)?;
        out.band_names = self.band_names.clone();
        out.source_bit_depth = self.source_bit_depth;
        Ok(out)
    }
}

/// Returns a new image holding the requested bands in the given order.
pub fn select_bands(image: &RasterImage, indices: &[usize]) -> Result<RasterImage, RasterError> {
    if indices.is_empty() {
        return Err(RasterError::EmptyBandSelection);
    }
    let plane = image.plane_len();
    let mut data = Vec::with_capacity(indices.len() * plane);
    for &index in indices {
        if index >= image.channels {
            return Err(RasterError::IndexOutOfRange {
                index,
                channels: image.channels,
            });
        }
        data.extend_from_slice(image.band(index));
    }
    let mut out = RasterImage::with_mask(
        indices.len(),
        image.height,
        image.width,
        data,
        image.nodata_mask.clone(),
    )?;
    out.band_names = image
        .band_names
        .as_ref()
        .map(|names| indices.iter().map(|&i| names[i].clone()).collect());
    out.source_bit_depth = image.source_bit_depth;
    Ok(out)
}
