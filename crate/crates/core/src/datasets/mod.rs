//! Dataset adapters that turn on-disk layouts into [`DatasetManifest`]s, a
//! synthetic dataset generator and train-split channel statistics.

mod channel_stats;
mod folder;
mod synthetic;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use channel_stats::{
    compute_channel_stats, read_stats_preset, write_stats_preset, ChannelStats, Moments,
};
pub use folder::{split_file_names, IMAGE_EXTENSIONS};
pub use synthetic::{generate_synthetic, SyntheticSpec};

use crate::extract::ExtractError;
use crate::manifest::{DatasetManifest, ManifestError, Task};
use crate::raster::{load_raster, RasterError};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{root}: {reason}")]
    LayoutMismatch { root: PathBuf, reason: String },
    #[error("split file {0} not found")]
    UnknownSplitFile(PathBuf),
    #[error("{file}: entry {entry:?} matches no image under the dataset root")]
    MissingSplitEntry { file: PathBuf, entry: String },
    #[error("expected {expected} class folders, found {found}")]
    ClassCountMismatch { expected: usize, found: usize },
    #[error("sample {id} has {found} channels, earlier samples have {expected}")]
    ChannelCountVaries {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("no train samples")]
    EmptyTrainSplit,
    #[error("stats preset {path}: {reason}")]
    BadPreset { path: PathBuf, reason: String },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("io failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Where a manifest comes from. `splits` overrides the directory holding
/// the split list files; it defaults to the dataset root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dataset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdapterSpec {
    Eurosat {
        root: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        splits: Option<PathBuf>,
    },
    Ucm {
        root: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        splits: Option<PathBuf>,
    },
    Resisc45 {
        root: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        splits: Option<PathBuf>,
    },
    /// `root` is a manifest CSV, or a directory containing `manifest.csv`.
    GenericManifest {
        root: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        task: Option<Task>,
    },
    /// Generated into `root` on first use, then read back from there.
    Synthetic { root: PathBuf, spec: SyntheticSpec },
}

impl AdapterSpec {
    /// Short dataset name used in result keys.
    pub fn name(&self) -> String {
        match self {
            AdapterSpec::Eurosat { .. } => "eurosat".into(),
            AdapterSpec::Ucm { .. } => "ucm".into(),
            AdapterSpec::Resisc45 { .. } => "resisc45".into(),
            AdapterSpec::GenericManifest { root, .. } => {
                let dir = if root.extension().is_some_and(|e| e == "csv") {
                    root.parent().unwrap_or(root)
                } else {
                    root
                };
                dir.file_name()
                    .map_or_else(|| "manifest".into(), |n| n.to_string_lossy().into_owned())
            }
            AdapterSpec::Synthetic { .. } => "synthetic".into(),
        }
    }

    pub fn root(&self) -> &Path {
        match self {
            AdapterSpec::Eurosat { root, .. }
            | AdapterSpec::Ucm { root, .. }
            | AdapterSpec::Resisc45 { root, .. }
            | AdapterSpec::GenericManifest { root, .. }
            | AdapterSpec::Synthetic { root, .. } => root,
        }
    }
}

/// Folder-per-class datasets with published split lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FolderLayout {
    pub name: &'static str,
    pub num_classes: usize,
    /// Split files are `{prefix}-train.txt`, `{prefix}-val.txt`, `{prefix}-test.txt`.
    pub split_prefix: &'static str,
}

pub const EUROSAT: FolderLayout = FolderLayout {
    name: "eurosat",
    num_classes: 10,
    split_prefix: "eurosat",
};
pub const UCM: FolderLayout = FolderLayout {
    name: "ucm",
    num_classes: 21,
    split_prefix: "ucmerced",
};
pub const RESISC45: FolderLayout = FolderLayout {
    name: "resisc45",
    num_classes: 45,
    split_prefix: "resisc45",
};

pub fn build_manifest(spec: &AdapterSpec) -> Result<DatasetManifest, DatasetError> {
    match spec {
        AdapterSpec::Eurosat { root, splits } => folder::build(EUROSAT, root, splits.as_deref()),
        AdapterSpec::Ucm { root, splits } => folder::build(UCM, root, splits.as_deref()),
        AdapterSpec::Resisc45 { root, splits } => folder::build(RESISC45, root, splits.as_deref()),
        AdapterSpec::GenericManifest { root, task } => {
            let csv = if root.is_dir() {
                root.join("manifest.csv")
            } else {
                root.clone()
            };
            Ok(DatasetManifest::read_csv(&csv, *task)?)
        }
        AdapterSpec::Synthetic { root, spec } => {
            let csv = root.join("manifest.csv");
            if csv.exists() {
                Ok(DatasetManifest::read_csv(&csv, Some(spec.task))?)
            } else {
                generate_synthetic(spec, root)
            }
        }
    }
}

/// Opens every image once; the first unreadable one is returned as an error.
pub fn verify_manifest(manifest: &DatasetManifest) -> Result<(), DatasetError> {
    use rayon::prelude::*;
    manifest
        .samples
        .par_iter()
        .try_for_each(|s| load_raster(&s.image_path, None).map(drop))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adapter_spec_toml_shape() {
        let spec: AdapterSpec = toml::from_str("dataset = \"eurosat\"\nroot = \"/data/eurosat\"\n").unwrap();
        assert_eq!(
            spec,
            AdapterSpec::Eurosat {
                root: "/data/eurosat".into(),
                splits: None
            }
        );
        assert_eq!(spec.name(), "eurosat");
        assert!(toml::from_str::<AdapterSpec>("dataset = \"ucm\"\nroot = \"x\"\nbogus = 1\n").is_err());
        let generic: AdapterSpec =
            toml::from_str("dataset = \"generic-manifest\"\nroot = \"/d/sat6/manifest.csv\"\n").unwrap();
        assert_eq!(generic.name(), "sat6");
    }
}
