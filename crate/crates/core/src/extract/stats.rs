use super::ExtractError;
use crate::raster::RasterImage;

/// Per-band `(mean, population std, min, max)` over unmasked pixels,
/// concatenated band by band into a `4c` vector.
pub fn image_statistics(image: &RasterImage) -> Result<Vec<f32>, ExtractError> {
    let mut out = Vec::with_capacity(4 * image.channels());
    for band in 0..image.channels() {
        let mut n = 0usize;
        let mut sum = 0.0f64;
        let mut lo = f32::INFINITY;
        let mut hi = f32::NEG_INFINITY;
        for (i, &v) in image.band(band).iter().enumerate() {
            if image.is_masked(i) {
                continue;
            }
            n += 1;
            sum += f64::from(v);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if n == 0 {
            return Err(ExtractError::AllMaskedChannel(band));
        }
        let mean = sum / n as f64;
        let ss: f64 = image
            .band(band)
            .iter()
            .enumerate()
            .filter(|(i, _)| !image.is_masked(*i))
            .map(|(_, &v)| (f64::from(v) - mean).powi(2))
            .sum();
        let std = (ss / n as f64).sqrt();
        out.extend([mean as f32, std as f32, lo, hi]);
    }
    Ok(out)
}
