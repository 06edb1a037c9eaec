use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::manifest::{DatasetManifest, Label, Sample, Split, Task};
use crate::raster::{save_raster, RasterImage};
use crate::rng::{seeded, STREAM_SYNTHETIC};

fn default_noise_std() -> f64 {
    100.0
}

fn default_base() -> f64 {
    1000.0
}

/// Gaussian-noise images whose per-channel class means sit `separation`
/// noise standard deviations apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_per_class: usize,
    pub num_classes: usize,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub task: Task,
    pub seed: u64,
    pub separation: f64,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
    /// Mean pixel value of the class with offset 0.
    #[serde(default = "default_base")]
    pub base: f64,
}

impl SyntheticSpec {
    pub fn multiclass(num_classes: usize, n_per_class: usize, channels: usize, size: usize, separation: f64, seed: u64) -> Self {
        Self {
            n_per_class,
            num_classes,
            channels,
            height: size,
            width: size,
            task: Task::Multiclass,
            seed,
            separation,
            noise_std: default_noise_std(),
            base: default_base(),
        }
    }

    /// Largest class mean any sample can have: useful for a fixed min-max range.
    pub fn max_mean(&self) -> f64 {
        let top = self.num_classes.saturating_sub(1) as f64;
        let labels = match self.task {
            Task::Multiclass => 1.0,
            Task::Multilabel => 3.0,
        };
        self.base + self.separation * self.noise_std * top * labels
    }

    fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: &str| Err(DatasetError::InvalidSpec(m.into()));
        if self.n_per_class == 0 || self.num_classes == 0 {
            return bad("class and sample counts must be >= 1");
        }
        if self.channels == 0 || self.height == 0 || self.width == 0 {
            return bad("image dimensions must be >= 1");
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return bad("separation must be finite and >= 0");
        }
        if !(self.noise_std.is_finite() && self.noise_std > 0.0) || !self.base.is_finite() {
            return bad("noise_std must be > 0 and base finite");
        }
        if self.n_per_class * self.num_classes < 5 {
            return bad("at least 5 samples are needed for an 80/20 split");
        }
        Ok(())
    }
}

/// Writes images under `out_root/images/` plus `manifest.csv` and
/// `classes.txt`. Every fifth sample goes to the test split.
pub fn generate_synthetic(spec: &SyntheticSpec, out_root: &Path) -> Result<DatasetManifest, DatasetError> {
    spec.validate()?;
    let k = spec.num_classes;
    let mut rng = seeded(spec.seed, STREAM_SYNTHETIC);
    // offsets[ch][class]: each channel ranks the classes differently
    let offsets: Vec<Vec<f64>> = (0..spec.channels)
        .map(|_| {
            let mut perm: Vec<usize> = (0..k).collect();
            perm.shuffle(&mut rng);
            perm.into_iter().map(|p| p as f64).collect()
        })
        .collect();
    let class_names: Vec<String> = (0..k).map(|j| format!("class_{j:02}")).collect();
    let plane = spec.height * spec.width;
    let step = spec.separation * spec.noise_std;

    let mut samples = Vec::with_capacity(k * spec.n_per_class);
    for s in 0..k * spec.n_per_class {
        let primary = s / spec.n_per_class;
        let classes: Vec<usize> = match spec.task {
            Task::Multiclass => vec![primary],
            Task::Multilabel => {
                let count = rng.random_range(1..=3usize).min(k);
                let mut others: Vec<usize> = (0..k).filter(|&j| j != primary).collect();
                others.shuffle(&mut rng);
                let mut chosen = vec![primary];
                chosen.extend(others.into_iter().take(count - 1));
                chosen
            }
        };
        let mut data = Vec::with_capacity(spec.channels * plane);
        for row in &offsets {
            let mean = spec.base + step * classes.iter().map(|&j| row[j]).sum::<f64>();
            data.extend((0..plane).map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                (mean + spec.noise_std * z) as f32
            }));
        }
        let image = RasterImage::new(spec.channels, spec.height, spec.width, data)?;
        let id = format!("images/{}/{s:05}.rsr", class_names[primary]);
        let path = out_root.join(&id);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| DatasetError::io(parent, e))?;
        }
        save_raster(&image, &path)?;
        let label = match spec.task {
            Task::Multiclass => Label::Multiclass(primary),
            Task::Multilabel => Label::Multilabel((0..k).map(|j| classes.contains(&j)).collect()),
        };
        samples.push(Sample {
            id,
            image_path: path,
            label,
            split: if s % 5 == 4 { Split::Test } else { Split::Train },
        });
    }
    let manifest = DatasetManifest::new("synthetic", spec.task, class_names, samples)?;
    manifest.write_to_dir(out_root)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::load_raster;

    fn small(task: Task) -> SyntheticSpec {
        SyntheticSpec {
            task,
            ..SyntheticSpec::multiclass(4, 5, 2, 3, 10.0, 9)
        }
    }

    #[test]
    fn shapes_and_split() {
        let dir = tempfile::tempdir().unwrap();
        let m = generate_synthetic(&small(Task::Multiclass), dir.path()).unwrap();
        assert_eq!(m.samples.len(), 20);
        assert_eq!(m.split(Split::Test).count(), 4);
        let img = load_raster(&m.samples[0].image_path, None).unwrap();
        assert_eq!((img.channels(), img.height(), img.width()), (2, 3, 3));
        let back = DatasetManifest::read_csv(&dir.path().join("manifest.csv"), None).unwrap();
        assert_eq!(back.samples.len(), 20);
        assert_eq!(back.samples[7].label, m.samples[7].label);
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ma = generate_synthetic(&small(Task::Multilabel), a.path()).unwrap();
        generate_synthetic(&small(Task::Multilabel), b.path()).unwrap();
        for s in &ma.samples {
            let pa = std::fs::read(a.path().join(&s.id)).unwrap();
            let pb = std::fs::read(b.path().join(&s.id)).unwrap();
            assert_eq!(pa, pb);
        }
        assert_eq!(
            std::fs::read(a.path().join("manifest.csv")).unwrap(),
            std::fs::read(b.path().join("manifest.csv")).unwrap()
        );
    }

    #[test]
    fn multilabel_counts() {
        let dir = tempfile::tempdir().unwrap();
        let m = generate_synthetic(&small(Task::Multilabel), dir.path()).unwrap();
        for s in &m.samples {
            let n = s.label.bits().unwrap().iter().filter(|&&b| b).count();
            assert!((1..=3).contains(&n));
        }
    }

    #[test]
    fn class_means_are_separated() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SyntheticSpec::multiclass(3, 5, 1, 8, 10.0, 1);
        let m = generate_synthetic(&spec, dir.path()).unwrap();
        let mean = |i: usize| {
            let img = load_raster(&m.samples[i].image_path, None).unwrap();
            img.data().iter().map(|&v| f64::from(v)).sum::<f64>() / 64.0
        };
        let mut class_means: Vec<f64> = (0..3).map(|c| mean(c * 5)).collect();
        class_means.sort_by(f64::total_cmp);
        for w in class_means.windows(2) {
            // one unit of offset is 1000, noise of a 64-pixel mean is 12.5
            assert!((w[1] - w[0] - 1000.0).abs() < 100.0, "{class_means:?}");
        }
    }

    #[test]
    fn invalid_specs() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = small(Task::Multiclass);
        spec.separation = f64::NAN;
        assert!(matches!(generate_synthetic(&spec, dir.path()), Err(DatasetError::InvalidSpec(_))));
        spec = SyntheticSpec::multiclass(1, 2, 1, 2, 1.0, 0);
        assert!(matches!(generate_synthetic(&spec, dir.path()), Err(DatasetError::InvalidSpec(_))));
    }
}
