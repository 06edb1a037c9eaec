//! Labels, samples and the dataset manifest that ties them together.
//!
//! On disk a manifest is a CSV with header `id,path,split,label` plus a
//! `classes.txt` sidecar (one class name per line, line number = index).
//! Multilabel labels are semicolon-separated class indices; the empty string
//! means "no labels".

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("duplicate sample id {0:?}")]
    DuplicateId(String),
    #[error("sample {id:?}: label {label} inconsistent with {task} task over {classes} classes")]
    InvalidLabel {
        id: String,
        label: String,
        task: Task,
        classes: usize,
    },
    #[error("manifest has no {0} samples")]
    MissingSplit(Split),
    #[error("manifest has no classes")]
    NoClasses,
    #[error("unknown split {0:?}")]
    UnknownSplit(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("io failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Multiclass,
    Multilabel,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Multiclass => "multiclass",
            Task::Multilabel => "multilabel",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = ManifestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "val" | "valid" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(ManifestError::UnknownSplit(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Multiclass(usize),
    /// One flag per class.
    Multilabel(Vec<bool>),
}

impl Label {
    pub fn task(&self) -> Task {
        match self {
            Label::Multiclass(_) => Task::Multiclass,
            Label::Multilabel(_) => Task::Multilabel,
        }
    }

    pub fn is_valid_for(&self, task: Task, num_classes: usize) -> bool {
        match self {
            Label::Multiclass(c) => task == Task::Multiclass && *c < num_classes,
            Label::Multilabel(bits) => task == Task::Multilabel && bits.len() == num_classes,
        }
    }

    pub fn class_index(&self) -> Option<usize> {
        match self {
            Label::Multiclass(c) => Some(*c),
            Label::Multilabel(_) => None,
        }
    }

    pub fn bits(&self) -> Option<&[bool]> {
        match self {
            Label::Multilabel(b) => Some(b),
            Label::Multiclass(_) => None,
        }
    }

    /// Label column text as written to manifest CSVs.
    pub fn encode(&self) -> String {
        match self {
            Label::Multiclass(c) => c.to_string(),
            Label::Multilabel(bits) => bits
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| i.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        }
    }

    pub fn decode(text: &str, task: Task, num_classes: usize) -> Option<Self> {
        let text = text.trim();
        match task {
            Task::Multiclass => text
                .parse::<usize>()
                .ok()
                .filter(|&c| c < num_classes)
                .map(Label::Multiclass),
            Task::Multilabel => {
                let mut bits = vec![false; num_classes];
                if !text.is_empty() {
                    for part in text.split(';') {
                        let c = part.trim().parse::<usize>().ok()?;
                        *bits.get_mut(c)? = true;
                    }
                }
                Some(Label::Multilabel(bits))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Relative path from the dataset root with `/` separators.
    pub id: String,
    pub image_path: PathBuf,
    pub label: Label,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub task: Task,
    pub class_names: Vec<String>,
    pub samples: Vec<Sample>,
}

impl DatasetManifest {
    /// Builds and validates a manifest.
    pub fn new(
        name: impl Into<String>,
        task: Task,
        class_names: Vec<String>,
        samples: Vec<Sample>,
    ) -> Result<Self, ManifestError> {
        let manifest = Self {
            name: name.into(),
            task,
            class_names,
            samples,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        if self.class_names.is_empty() {
            return Err(ManifestError::NoClasses);
        }
        let mut seen = HashSet::with_capacity(self.samples.len());
        for s in &self.samples {
            if !seen.insert(s.id.as_str()) {
                return Err(ManifestError::DuplicateId(s.id.clone()));
            }
            if !s.label.is_valid_for(self.task, self.num_classes()) {
                return Err(ManifestError::InvalidLabel {
                    id: s.id.clone(),
                    label: s.label.encode(),
                    task: self.task,
                    classes: self.num_classes(),
                });
            }
        }
        for split in [Split::Train, Split::Test] {
            if !self.samples.iter().any(|s| s.split == split) {
                return Err(ManifestError::MissingSplit(split));
            }
        }
        Ok(())
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    pub fn find(&self, id: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.id == id)
    }

    /// Writes `manifest.csv` and `classes.txt` into `dir`. Image paths under
    /// `dir` are stored relative to it.
    pub fn write_to_dir(&self, dir: &Path) -> Result<PathBuf, ManifestError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ManifestError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let classes_path = dir.join("classes.txt");
        let mut classes = self.class_names.join("\n");
        classes.push('\n');
        std::fs::write(&classes_path, classes).map_err(io(&classes_path))?;

        let csv_path = dir.join("manifest.csv");
        let csv_err = |source| ManifestError::Csv {
            path: csv_path.clone(),
            source,
        };
        let mut writer = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
        writer
            .write_record(["id", "path", "split", "label"])
            .map_err(csv_err)?;
        let abs_dir = std::path::absolute(dir).unwrap_or_else(|_| dir.to_path_buf());
        for s in &self.samples {
            let path = s
                .image_path
                .strip_prefix(dir)
                .or_else(|_| s.image_path.strip_prefix(&abs_dir))
                .unwrap_or(&s.image_path);
            let path = path.to_string_lossy().replace('\\', "/");
            writer
                .write_record([
                    s.id.as_str(),
                    path.as_str(),
                    s.split.as_str(),
                    s.label.encode().as_str(),
                ])
                .map_err(csv_err)?;
        }
        writer.flush().map_err(|e| ManifestError::Io {
            path: csv_path.clone(),
            source: e,
        })?;
        Ok(csv_path)
    }

    /// Reads a manifest CSV and the `classes.txt` next to it. Relative image
    /// paths resolve against the CSV's directory. When `task` is `None` the
    /// task is multilabel iff some label is empty or contains `;`.
    pub fn read_csv(csv_path: &Path, task: Option<Task>) -> Result<Self, ManifestError> {
        let dir = csv_path.parent().unwrap_or(Path::new("."));
        let classes_path = dir.join("classes.txt");
        let classes_text =
            std::fs::read_to_string(&classes_path).map_err(|source| ManifestError::Io {
                path: classes_path.clone(),
                source,
            })?;
        let class_names: Vec<String> = classes_text
            .lines()
            .map(|l| l.trim_end_matches('\r').to_string())
            .filter(|l| !l.is_empty())
            .collect();

        let csv_err = |source| ManifestError::Csv {
            path: csv_path.to_path_buf(),
            source,
        };
        let mut reader = csv::Reader::from_path(csv_path).map_err(csv_err)?;
        let headers = reader.headers().map_err(csv_err)?.clone();
        let expected = ["id", "path", "split", "label"];
        if headers.len() != 4 || headers.iter().zip(expected).any(|(a, b)| a.trim() != b) {
            return Err(ManifestError::Parse {
                line: 1,
                reason: format!("header must be id,path,split,label (found {headers:?})"),
            });
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            if record.len() != 4 {
                return Err(ManifestError::Parse {
                    line: i + 2,
                    reason: format!("expected 4 fields, found {}", record.len()),
                });
            }
            rows.push((
                record[0].to_string(),
                record[1].to_string(),
                record[2].to_string(),
                record[3].to_string(),
            ));
        }
        let task = task.unwrap_or_else(|| {
            if rows.iter().any(|r| r.3.trim().is_empty() || r.3.contains(';')) {
                Task::Multilabel
            } else {
                Task::Multiclass
            }
        });
        let k = class_names.len();
        let mut samples = Vec::with_capacity(rows.len());
        for (i, (id, path, split, label)) in rows.into_iter().enumerate() {
            let split: Split = split.parse()?;
            let label = Label::decode(&label, task, k).ok_or_else(|| ManifestError::InvalidLabel {
                id: id.clone(),
                label: label.clone(),
                task,
                classes: k,
            })?;
            let path = PathBuf::from(&path);
            let image_path = if path.is_absolute() { path } else { dir.join(path) };
            if id.is_empty() {
                return Err(ManifestError::Parse {
                    line: i + 2,
                    reason: "empty id".into(),
                });
            }
            samples.push(Sample {
                id,
                image_path,
                label,
                split,
            });
        }
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        Self::new(name, task, class_names, samples)
    }
}
