use super::PreprocessError;
use crate::raster::RasterImage;

/// Conventional natural-image channel statistics (RGB order).
pub const IMAGENET_MEANS: [f32; 3] = [0.485, 0.456, 0.406];
pub const IMAGENET_STDS: [f32; 3] = [0.229, 0.224, 0.225];

#[derive(Debug, Clone, PartialEq)]
pub enum MinMaxScope {
    /// Each channel of each image maps its own min to 0 and max to 1.
    PerImage,
    /// `lo → 0`, `hi → 1`, values outside clamp.
    FixedRange { lo: f32, hi: f32 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormalizeSpec {
    MinMax(MinMaxScope),
    Standardize { means: Vec<f32>, stds: Vec<f32> },
    Reflectance { divisor: f32 },
    /// Per-image, per-channel percentile clip followed by rescale to [0, 1].
    PercentileClip { lo_pct: f64, hi_pct: f64 },
}

impl NormalizeSpec {
    pub fn reflectance() -> Self {
        Self::Reflectance { divisor: 10_000.0 }
    }

    pub fn imagenet() -> Self {
        Self::Standardize {
            means: IMAGENET_MEANS.to_vec(),
            stds: IMAGENET_STDS.to_vec(),
        }
    }

    pub fn percentile_default() -> Self {
        Self::PercentileClip {
            lo_pct: 2.0,
            hi_pct: 98.0,
        }
    }

    pub fn validate(&self) -> Result<(), PreprocessError> {
        let bad = |msg: String| Err(PreprocessError::InvalidSpec(msg));
        match self {
            NormalizeSpec::MinMax(MinMaxScope::FixedRange { lo, hi }) => {
                if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                    return bad(format!("minmax range [{lo}, {hi}] must satisfy lo < hi"));
                }
            }
            NormalizeSpec::MinMax(MinMaxScope::PerImage) => {}
            NormalizeSpec::Standardize { means, stds } => {
                if means.len() != stds.len() || means.is_empty() {
                    return bad(format!(
                        "standardize needs equal, non-empty mean/std lists ({} vs {})",
                        means.len(),
                        stds.len()
                    ));
                }
                if stds.iter().any(|s| !(s.is_finite() && *s > 0.0))
                    || means.iter().any(|m| !m.is_finite())
                {
                    return bad("standardize stds must be finite and > 0".into());
                }
            }
            NormalizeSpec::Reflectance { divisor } => {
                if !(divisor.is_finite() && *divisor > 0.0) {
                    return bad(format!("reflectance divisor {divisor} must be > 0"));
                }
            }
            NormalizeSpec::PercentileClip { lo_pct, hi_pct } => {
                if !(0.0 <= *lo_pct && lo_pct < hi_pct && *hi_pct <= 100.0) {
                    return bad(format!(
                        "percentiles must satisfy 0 <= lo < hi <= 100 (got {lo_pct}, {hi_pct})"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Linear-interpolation percentile: rank `q/100 · (n − 1)` over the sorted
/// values.
pub fn percentile(values: &[f32], q: f64) -> Result<f64, PreprocessError> {
    if values.is_empty() {
        return Err(PreprocessError::EmptyInput);
    }
    if !(0.0..=100.0).contains(&q) {
        return Err(PreprocessError::InvalidSpec(format!(
            "percentile {q} outside [0, 100]"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f32::total_cmp);
    Ok(percentile_sorted(&sorted, q))
}

fn percentile_sorted(sorted: &[f32], q: f64) -> f64 {
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = rank - lo as f64;
    let a = f64::from(sorted[lo]);
    a + frac * (f64::from(sorted[hi]) - a)
}

/// Affine `(v − offset) / scale` per channel, optionally clamped to [0, 1].
/// A zero scale maps the channel to zeros.
struct ChannelMap {
    offset: f64,
    scale: f64,
    clamp: bool,
}

impl ChannelMap {
    fn apply(&self, v: f32) -> f32 {
        if self.scale == 0.0 {
            return 0.0;
        }
        let mut out = (f64::from(v) - self.offset) / self.scale;
        if self.clamp {
            out = out.clamp(0.0, 1.0);
        }
        out as f32
    }
}

pub fn normalize(image: &RasterImage, spec: &NormalizeSpec) -> Result<RasterImage, PreprocessError> {
    spec.validate()?;
    let channels = image.channels();
    if let NormalizeSpec::Standardize { means, .. } = spec {
        if means.len() != channels {
            return Err(PreprocessError::ChannelCountMismatch {
                stats: means.len(),
                image: channels,
            });
        }
    }
    let plane = image.plane_len();
    let mut out = Vec::with_capacity(image.data().len());
    for band in 0..channels {
        let values = image.band(band);
        let unmasked = || {
            values
                .iter()
                .enumerate()
                .filter(|(i, _)| !image.is_masked(*i))
                .map(|(_, &v)| v)
        };
        let map = match spec {
            NormalizeSpec::MinMax(MinMaxScope::PerImage) => {
                let (lo, hi) = unmasked().fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
                if lo > hi {
                    // every pixel masked
                    ChannelMap { offset: 0.0, scale: 0.0, clamp: false }
                } else {
                    ChannelMap {
                        offset: f64::from(lo),
                        scale: f64::from(hi) - f64::from(lo),
                        clamp: true,
                    }
                }
            }
            NormalizeSpec::MinMax(MinMaxScope::FixedRange { lo, hi }) => ChannelMap {
                offset: f64::from(*lo),
                scale: f64::from(*hi) - f64::from(*lo),
                clamp: true,
            },
            NormalizeSpec::Standardize { means, stds } => ChannelMap {
                offset: f64::from(means[band]),
                scale: f64::from(stds[band]),
                clamp: false,
            },
            NormalizeSpec::Reflectance { divisor } => ChannelMap {
                offset: 0.0,
                scale: f64::from(*divisor),
                clamp: false,
            },
            NormalizeSpec::PercentileClip { lo_pct, hi_pct } => {
                let mut sorted: Vec<f32> = unmasked().collect();
                if sorted.is_empty() {
                    ChannelMap { offset: 0.0, scale: 0.0, clamp: false }
                } else {
                    sorted.sort_by(f32::total_cmp);
                    let lo = percentile_sorted(&sorted, *lo_pct);
                    let hi = percentile_sorted(&sorted, *hi_pct);
                    ChannelMap {
                        offset: lo,
                        scale: hi - lo,
                        clamp: true,
                    }
                }
            }
        };
        out.extend(
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| if image.is_masked(i) { 0.0 } else { map.apply(v) }),
        );
        debug_assert_eq!(out.len(), (band + 1) * plane);
    }
    Ok(image.map_data(out)?)
}
