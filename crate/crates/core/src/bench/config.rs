use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::BenchError;
use crate::datasets::{read_stats_preset, AdapterSpec};
use crate::eval::DEFAULT_K;
use crate::extract::{ZcaEpsilon, DEFAULT_FEATURES, DEFAULT_KERNEL, PATCHES_PER_FEATURE};
use crate::preprocess::{MinMaxScope, NormalizeSpec, Pipeline, ResizeSpec, Step};

fn default_k() -> usize {
    DEFAULT_K
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_features() -> usize {
    DEFAULT_FEATURES
}

fn default_kernel() -> usize {
    DEFAULT_KERNEL
}

fn default_divisor() -> f32 {
    10_000.0
}

fn default_lo_pct() -> f64 {
    2.0
}

fn default_hi_pct() -> f64 {
    98.0
}

/// One benchmark sweep as read from TOML. Relative paths resolve against
/// the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub dataset: AdapterSpec,
    /// Named band index lists. An empty list keeps every band.
    pub band_sets: BTreeMap<String, Vec<usize>>,
    pub pipelines: BTreeMap<String, Vec<StepConfig>>,
    pub extractors: Vec<ExtractorConfig>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MinMaxKind {
    #[default]
    PerImage,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepConfig {
    Resize {
        height: usize,
        width: usize,
    },
    Reflectance {
        #[serde(default = "default_divisor")]
        divisor: f32,
    },
    Minmax {
        #[serde(default)]
        scope: MinMaxKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo: Option<f32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<f32>,
    },
    /// Either `preset` (`"imagenet"` or a `channel,mean,std` file) or
    /// explicit `means` and `stds`.
    Standardize {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        preset: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        means: Option<Vec<f32>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stds: Option<Vec<f32>>,
    },
    Percentile {
        #[serde(default = "default_lo_pct")]
        lo: f64,
        #[serde(default = "default_hi_pct")]
        hi: f64,
    },
}

impl StepConfig {
    /// Preset paths are used as given; [`BenchmarkConfig::from_file`] has
    /// already resolved them.
    pub fn to_step(&self) -> Result<Step, BenchError> {
        let spec = match self {
            StepConfig::Resize { height, width } => {
                return Ok(Step::Resize(
                    ResizeSpec::new(*height, *width).map_err(|e| BenchError::Config(e.to_string()))?,
                ))
            }
            StepConfig::Reflectance { divisor } => NormalizeSpec::Reflectance { divisor: *divisor },
            StepConfig::Minmax { scope, lo, hi } => match (scope, lo, hi) {
                (MinMaxKind::PerImage, None, None) => NormalizeSpec::MinMax(MinMaxScope::PerImage),
                (MinMaxKind::Fixed, Some(lo), Some(hi)) => {
                    NormalizeSpec::MinMax(MinMaxScope::FixedRange { lo: *lo, hi: *hi })
                }
                _ => {
                    return Err(BenchError::Config(
                        "minmax: scope \"fixed\" needs lo and hi; \"per_image\" takes neither".into(),
                    ))
                }
            },
            StepConfig::Standardize { preset, means, stds } => match (preset, means, stds) {
                (Some(p), None, None) if p == "imagenet" => NormalizeSpec::imagenet(),
                (Some(p), None, None) => read_stats_preset(Path::new(p))?,
                (None, Some(m), Some(s)) => NormalizeSpec::Standardize {
                    means: m.clone(),
                    stds: s.clone(),
                },
                _ => {
                    return Err(BenchError::Config(
                        "standardize: give either preset or both means and stds".into(),
                    ))
                }
            },
            StepConfig::Percentile { lo, hi } => NormalizeSpec::PercentileClip {
                lo_pct: *lo,
                hi_pct: *hi,
            },
        };
        spec.validate().map_err(|e| BenchError::Config(e.to_string()))?;
        Ok(Step::Normalize(spec))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExtractorConfig {
    ImageStatistics,
    RcfRandom {
        #[serde(default = "default_features")]
        features: usize,
        #[serde(default = "default_kernel")]
        kernel: usize,
        #[serde(default)]
        bias: f32,
    },
    RcfEmpirical {
        #[serde(default = "default_features")]
        features: usize,
        #[serde(default = "default_kernel")]
        kernel: usize,
        /// Defaults to 16 patches per feature.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_patches: Option<usize>,
        /// Absolute whitening epsilon; defaults to 1e-6 times the mean eigenvalue.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        #[serde(default)]
        bias: f32,
    },
    /// Precomputed embeddings. `values` and `ids` are path templates in
    /// which `{bands}` and `{pipeline}` are substituted.
    Import {
        name: String,
        values: String,
        ids: String,
    },
}

impl ExtractorConfig {
    pub fn is_stochastic(&self) -> bool {
        matches!(self, ExtractorConfig::RcfRandom { .. } | ExtractorConfig::RcfEmpirical { .. })
    }

    /// Stable identifier used in result keys.
    pub fn key(&self) -> String {
        match self {
            ExtractorConfig::ImageStatistics => "image_statistics".into(),
            ExtractorConfig::RcfRandom { features, kernel, .. } => {
                format!("rcf_random(F={features},k={kernel})")
            }
            ExtractorConfig::RcfEmpirical { features, kernel, .. } => {
                format!("rcf_empirical(F={features},k={kernel})")
            }
            ExtractorConfig::Import { name, .. } => format!("import({name})"),
        }
    }

    pub fn n_patches(&self) -> Option<usize> {
        match self {
            ExtractorConfig::RcfEmpirical {
                features, n_patches, ..
            } => Some(n_patches.unwrap_or(PATCHES_PER_FEATURE * features)),
            _ => None,
        }
    }

    pub fn zca_epsilon(&self) -> ZcaEpsilon {
        match self {
            ExtractorConfig::RcfEmpirical {
                epsilon: Some(e), ..
            } => ZcaEpsilon::Absolute(*e),
            _ => ZcaEpsilon::default(),
        }
    }
}

/// Fills `{bands}` and `{pipeline}` in an import path template.
pub fn expand_template(template: &str, bands: &str, pipeline: &str) -> String {
    template.replace("{bands}", bands).replace("{pipeline}", pipeline)
}

impl BenchmarkConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, BenchError> {
        let config: Self = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Parses `path` and resolves relative paths against its directory.
    pub fn from_file(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        let config = Self::from_toml_str(&text)?;
        Ok(config.resolved(path.parent().unwrap_or(Path::new("."))))
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.into()));
        if self.band_sets.is_empty() {
            return bad("band_sets must name at least one band set");
        }
        if self.pipelines.is_empty() {
            return bad("pipelines must name at least one pipeline");
        }
        if self.extractors.is_empty() {
            return bad("extractors must list at least one extractor");
        }
        if self.k == 0 {
            return bad("k must be >= 1");
        }
        if self.seeds.is_empty() {
            return bad("seeds must be non-empty");
        }
        let mut keys = std::collections::HashSet::new();
        for e in &self.extractors {
            if !keys.insert(e.key()) {
                return Err(BenchError::Config(format!("extractor {} listed twice", e.key())));
            }
        }
        Ok(())
    }

    fn resolved(mut self, base: &Path) -> Self {
        let fix = |p: &Path| if p.is_relative() { base.join(p) } else { p.to_path_buf() };
        self.output_dir = fix(&self.output_dir);
        match &mut self.dataset {
            AdapterSpec::Eurosat { root, splits }
            | AdapterSpec::Ucm { root, splits }
            | AdapterSpec::Resisc45 { root, splits } => {
                *root = fix(root);
                if let Some(s) = splits {
                    *s = fix(s);
                }
            }
            AdapterSpec::GenericManifest { root, .. } | AdapterSpec::Synthetic { root, .. } => {
                *root = fix(root)
            }
        }
        for e in &mut self.extractors {
            if let ExtractorConfig::Import { values, ids, .. } = e {
                for t in [values, ids] {
                    if Path::new(t.as_str()).is_relative() {
                        *t = base.join(&*t).to_string_lossy().into_owned();
                    }
                }
            }
        }
        for steps in self.pipelines.values_mut() {
            for s in steps {
                if let StepConfig::Standardize {
                    preset: Some(p), ..
                } = s
                {
                    if p != "imagenet" && Path::new(p.as_str()).is_relative() {
                        *p = base.join(&*p).to_string_lossy().into_owned();
                    }
                }
            }
        }
        self
    }

    /// Build every named pipeline. Preset files are read here.
    pub fn build_pipelines(&self) -> Result<BTreeMap<String, Pipeline>, BenchError> {
        self.pipelines
            .iter()
            .map(|(name, steps)| {
                let steps = steps
                    .iter()
                    .map(StepConfig::to_step)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| BenchError::Config(format!("pipeline {name}: {e}")))?;
                Ok((name.clone(), Pipeline::new(steps)))
            })
            .collect()
    }

    /// SHA-256 of the canonical JSON form: insensitive to TOML formatting
    /// and key order, sensitive to every value.
    pub fn config_hash(&self) -> String {
        hash_json(&serde_json::to_value(self).expect("config serializes"))
    }
}

pub(crate) fn hash_json(value: &serde_json::Value) -> String {
    // serde_json maps are sorted by key, so this string is canonical
    let canonical = value.to_string();
    hex::encode(Sha256::digest(canonical.as_bytes()))
}
