use super::PreprocessError;
use crate::raster::RasterImage;

/// Target size of a bilinear resize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResizeSpec {
    pub out_height: usize,
    pub out_width: usize,
}

impl ResizeSpec {
    pub fn new(out_height: usize, out_width: usize) -> Result<Self, PreprocessError> {
        if out_height == 0 || out_width == 0 {
            return Err(PreprocessError::InvalidSpec(format!(
                "resize target {out_height}x{out_width} must be at least 1x1"
            )));
        }
        Ok(Self {
            out_height,
            out_width,
        })
    }

    pub fn square(size: usize) -> Result<Self, PreprocessError> {
        Self::new(size, size)
    }
}

/// Source taps for one output index along one axis.
#[derive(Debug, Clone, Copy)]
struct Tap {
    lo: usize,
    hi: usize,
    lo_weight: f32,
    hi_weight: f32,
}

/// Half-pixel-center sampling: `s = (d + 0.5) · in/out − 0.5`, negative
/// coordinates clamp to 0 and the upper tap clamps to `in − 1`.
fn axis_taps(input: usize, output: usize) -> Vec<Tap> {
    let scale = input as f32 / output as f32;
    (0..output)
        .map(|d| {
            let src = (scale * (d as f32 + 0.5) - 0.5).max(0.0);
            let lo = (src.floor() as usize).min(input - 1);
            let hi = (lo + 1).min(input - 1);
            let frac = src - lo as f32;
            Tap {
                lo,
                hi,
                lo_weight: 1.0 - frac,
                hi_weight: frac,
            }
        })
        .collect()
}

/// Resamples every channel independently with bilinear interpolation
/// (align-corners off, no antialiasing).
pub fn resize_bilinear(
    image: &RasterImage,
    spec: ResizeSpec,
) -> Result<RasterImage, PreprocessError> {
    if image.nodata_mask().is_some() {
        return Err(PreprocessError::MaskedResizeUnsupported);
    }
    let (in_h, in_w) = (image.height(), image.width());
    let (out_h, out_w) = (spec.out_height, spec.out_width);
    if (in_h, in_w) == (out_h, out_w) {
        return Ok(image.clone());
    }
    let rows = axis_taps(in_h, out_h);
    let cols = axis_taps(in_w, out_w);
    let mut data = Vec::with_capacity(image.channels() * out_h * out_w);
    for band in 0..image.channels() {
        let src = image.band(band);
        for row in &rows {
            let top = &src[row.lo * in_w..(row.lo + 1) * in_w];
            let bottom = &src[row.hi * in_w..(row.hi + 1) * in_w];
            for col in &cols {
                let upper = col.lo_weight * top[col.lo] + col.hi_weight * top[col.hi];
                let lower = col.lo_weight * bottom[col.lo] + col.hi_weight * bottom[col.hi];
                data.push(row.lo_weight * upper + row.hi_weight * lower);
            }
        }
    }
    Ok(image.resized_from(out_h, out_w, data)?)
}
