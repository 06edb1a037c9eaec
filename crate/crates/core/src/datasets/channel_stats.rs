use std::path::Path;

use rayon::prelude::*;

use super::DatasetError;
use crate::extract::load_prepared;
use crate::manifest::{DatasetManifest, Split};
use crate::preprocess::{NormalizeSpec, Pipeline};

/// Running count, mean and sum of squared deviations; two accumulators
/// merge exactly as if their inputs had been pushed into one.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let wb = other.count as f64 / n as f64;
        self.mean += delta * wb;
        self.m2 += other.m2 + delta * delta * self.count as f64 * wb;
        self.count = n;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn population_std(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub means: Vec<f64>,
    /// Population std; may be 0 for constant channels.
    pub stds: Vec<f64>,
    pub pixels: u64,
}

impl ChannelStats {
    /// Standardization with zero stds replaced by 1.
    pub fn to_normalize_spec(&self) -> NormalizeSpec {
        NormalizeSpec::Standardize {
            means: self.means.iter().map(|&m| m as f32).collect(),
            stds: self.stds.iter().map(|&s| if s > 0.0 { s as f32 } else { 1.0 }).collect(),
        }
    }
}

/// Per-channel mean and population std over every unmasked pixel of the
/// `split` images after band selection and `pipeline`. Images are processed
/// in parallel and merged in manifest order.
pub fn compute_channel_stats(
    manifest: &DatasetManifest,
    split: Split,
    bands: Option<&[usize]>,
    pipeline: &Pipeline,
) -> Result<ChannelStats, DatasetError> {
    let samples: Vec<_> = manifest.split(split).collect();
    if samples.is_empty() {
        return Err(DatasetError::EmptyTrainSplit);
    }
    let per_image: Vec<Vec<Moments>> = samples
        .par_iter()
        .map(|s| {
            let image = load_prepared(s, bands, pipeline)?;
            let moments = (0..image.channels())
                .map(|b| {
                    let mut m = Moments::default();
                    for (i, &v) in image.band(b).iter().enumerate() {
                        if !image.is_masked(i) {
                            m.push(f64::from(v));
                        }
                    }
                    m
                })
                .collect();
            Ok(moments)
        })
        .collect::<Result<_, DatasetError>>()?;

    let mut total = per_image[0].clone();
    for (s, moments) in samples.iter().zip(&per_image).skip(1) {
        if moments.len() != total.len() {
            return Err(DatasetError::ChannelCountVaries {
                id: s.id.clone(),
                expected: total.len(),
                found: moments.len(),
            });
        }
        for (t, m) in total.iter_mut().zip(moments) {
            t.merge(m);
        }
    }
    Ok(ChannelStats {
        means: total.iter().map(Moments::mean).collect(),
        stds: total.iter().map(Moments::population_std).collect(),
        pixels: total[0].count(),
    })
}

/// Writes `channel,mean,std`. Zero stds are written as 1.
pub fn write_stats_preset(stats: &ChannelStats, path: &Path) -> Result<(), DatasetError> {
    let csv_err = |e: csv::Error| DatasetError::BadPreset {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["channel", "mean", "std"]).map_err(csv_err)?;
    for (c, (&mean, &std)) in stats.means.iter().zip(&stats.stds).enumerate() {
        let std = if std > 0.0 {
            std
        } else {
            log::warn!("channel {c} is constant; writing std 1");
            1.0
        };
        w.write_record([c.to_string(), mean.to_string(), std.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| DatasetError::io(path, e))
}

/// Reads a `channel,mean,std` file as a standardization step.
pub fn read_stats_preset(path: &Path) -> Result<NormalizeSpec, DatasetError> {
    let bad = |reason: String| DatasetError::BadPreset {
        path: path.to_path_buf(),
        reason,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().map(str::trim).ne(["channel", "mean", "std"]) {
        return Err(bad(format!("header must be channel,mean,std (found {headers:?})")));
    }
    let mut means = Vec::new();
    let mut stds = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |j: usize| -> Result<f64, DatasetError> {
            record
                .get(j)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("row {}: bad number in column {j}", i + 2)))
        };
        let channel = field(0)?;
        if channel != i as f64 {
            return Err(bad(format!("row {}: channels must be listed 0, 1, 2, ...", i + 2)));
        }
        let std = field(2)?;
        if std <= 0.0 {
            return Err(bad(format!("row {}: std must be positive", i + 2)));
        }
        means.push(field(1)? as f32);
        stds.push(std as f32);
    }
    if means.is_empty() {
        return Err(bad("no channels".into()));
    }
    Ok(NormalizeSpec::Standardize { means, stds })
}
