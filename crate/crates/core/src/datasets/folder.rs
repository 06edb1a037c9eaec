use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::{DatasetError, FolderLayout};
use crate::manifest::{DatasetManifest, Label, Sample, Split, Task};

pub const IMAGE_EXTENSIONS: &[&str] = &["tif", "tiff", "png", "jpg", "jpeg", "rsr"];

/// Split list file names for a layout, in train/val/test order.
pub fn split_file_names(layout: FolderLayout) -> [(Split, String); 3] {
    [Split::Train, Split::Val, Split::Test].map(|s| (s, format!("{}-{}.txt", layout.split_prefix, s)))
}

fn sorted_entries(dir: &Path) -> Result<Vec<(String, PathBuf, bool)>, DatasetError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| DatasetError::io(dir, e))? {
        let entry = entry.map_err(|e| DatasetError::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') {
            continue;
        }
        let is_dir = entry.path().is_dir();
        out.push((name, entry.path(), is_dir));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Split entries are matched on file stem: published lists sometimes name a
/// different extension than the distributed imagery.
fn entry_key(entry: &str) -> Option<String> {
    let name = entry.rsplit(['/', '\\']).next()?;
    let stem = Path::new(name).file_stem()?.to_str()?;
    Some(stem.to_string())
}

pub(super) fn build(
    layout: FolderLayout,
    root: &Path,
    splits_dir: Option<&Path>,
) -> Result<DatasetManifest, DatasetError> {
    let mismatch = |reason: String| DatasetError::LayoutMismatch {
        root: root.to_path_buf(),
        reason,
    };
    if !root.is_dir() {
        return Err(mismatch("dataset root is not a directory".into()));
    }
    let classes: Vec<(String, PathBuf)> = sorted_entries(root)?
        .into_iter()
        .filter(|e| e.2)
        .map(|(name, path, _)| (name, path))
        .collect();
    if classes.is_empty() {
        return Err(mismatch("expected one sub-directory per class".into()));
    }
    if classes.len() != layout.num_classes {
        return Err(DatasetError::ClassCountMismatch {
            expected: layout.num_classes,
            found: classes.len(),
        });
    }

    // (id, path, class) in lexicographic id order
    let mut images = Vec::new();
    let mut by_key: HashMap<String, usize> = HashMap::new();
    for (class, (class_name, dir)) in classes.iter().enumerate() {
        for (name, path, is_dir) in sorted_entries(dir)? {
            if is_dir || !is_image(&path) {
                continue;
            }
            let key = entry_key(&name).unwrap_or_else(|| name.clone());
            if by_key.insert(key.clone(), images.len()).is_some() {
                return Err(mismatch(format!("image name {key:?} appears in more than one class")));
            }
            images.push((format!("{class_name}/{name}"), path, class));
        }
    }
    if images.is_empty() {
        return Err(mismatch("class folders contain no images".into()));
    }

    let splits_dir = splits_dir.unwrap_or(root);
    let mut assignment: Vec<Option<Split>> = vec![None; images.len()];
    for (split, file_name) in split_file_names(layout) {
        let path = splits_dir.join(&file_name);
        if !path.exists() {
            if split == Split::Val {
                continue;
            }
            return Err(DatasetError::UnknownSplitFile(path));
        }
        let text = std::fs::read_to_string(&path).map_err(|e| DatasetError::io(&path, e))?;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let idx = entry_key(line)
                .and_then(|k| by_key.get(&k).copied())
                .ok_or_else(|| DatasetError::MissingSplitEntry {
                    file: path.clone(),
                    entry: line.to_string(),
                })?;
            if let Some(prev) = assignment[idx].replace(split) {
                return Err(mismatch(format!("{line:?} listed in both {prev} and {split} splits")));
            }
        }
    }

    let unlisted = assignment.iter().filter(|a| a.is_none()).count();
    if unlisted > 0 {
        log::info!("{}: {unlisted} images not listed in any split file were skipped", layout.name);
    }
    let samples = images
        .into_iter()
        .zip(assignment)
        .filter_map(|((id, image_path, class), split)| {
            split.map(|split| Sample {
                id,
                image_path,
                label: Label::Multiclass(class),
                split,
            })
        })
        .collect();
    let class_names = classes.into_iter().map(|(n, _)| n).collect();
    Ok(DatasetManifest::new(layout.name, Task::Multiclass, class_names, samples)?)
}
