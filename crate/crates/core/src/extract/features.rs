use std::path::Path;

use rayon::prelude::*;

use super::{image_statistics, load_prepared, rcf_extract, ExtractError, RcfBank};
use crate::manifest::{DatasetManifest, Label, Split};
use crate::preprocess::Pipeline;

pub const EMBEDDING_MAGIC: &[u8; 7] = b"RSEMB1\n";

/// `n × d` embeddings with aligned sample ids and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    dim: usize,
    values: Vec<f32>,
    ids: Vec<String>,
    labels: Vec<Label>,
}

impl FeatureMatrix {
    pub fn new(
        dim: usize,
        values: Vec<f32>,
        ids: Vec<String>,
        labels: Vec<Label>,
    ) -> Result<Self, ExtractError> {
        if ids.len() != labels.len() || values.len() != ids.len() * dim {
            return Err(ExtractError::DimensionInconsistent(format!(
                "{} values, {} ids, {} labels for dimension {dim}",
                values.len(),
                ids.len(),
                labels.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(ExtractError::NonFiniteFeature {
                row: pos / dim.max(1),
                col: pos % dim.max(1),
            });
        }
        Ok(Self {
            dim,
            values,
            ids,
            labels,
        })
    }

    pub fn from_rows(
        rows: Vec<Vec<f32>>,
        ids: Vec<String>,
        labels: Vec<Label>,
    ) -> Result<Self, ExtractError> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(ExtractError::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        Self::new(dim, rows.concat(), ids, labels)
    }

    pub fn rows(&self) -> usize {
        self.ids.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Same ids and labels with new values of the same shape.
    pub fn with_values(&self, values: Vec<f32>) -> Result<Self, ExtractError> {
        Self::new(self.dim, values, self.ids.clone(), self.labels.clone())
    }

    /// Rows whose index satisfies `keep`, in order.
    pub fn select(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let mut values = Vec::new();
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        for i in 0..self.rows() {
            if keep(i) {
                values.extend_from_slice(self.row(i));
                ids.push(self.ids[i].clone());
                labels.push(self.labels[i].clone());
            }
        }
        Self {
            dim: self.dim,
            values,
            ids,
            labels,
        }
    }
}

/// Which extractor turns a preprocessed image into a vector.
#[derive(Debug, Clone, Copy)]
pub enum Extractor<'a> {
    ImageStatistics,
    Rcf(&'a RcfBank),
}

impl Extractor<'_> {
    pub fn extract(&self, image: &crate::raster::RasterImage) -> Result<Vec<f32>, ExtractError> {
        match self {
            Extractor::ImageStatistics => image_statistics(image),
            Extractor::Rcf(bank) => rcf_extract(image, bank),
        }
    }
}

/// Runs band selection, the pipeline and the extractor over every sample in
/// `splits`, in manifest order. The first failing sample aborts the run.
pub fn extract_features(
    manifest: &DatasetManifest,
    bands: Option<&[usize]>,
    pipeline: &Pipeline,
    extractor: Extractor<'_>,
    splits: &[Split],
) -> Result<FeatureMatrix, ExtractError> {
    let samples: Vec<_> = manifest
        .samples
        .iter()
        .filter(|s| splits.contains(&s.split))
        .collect();
    if samples.is_empty() {
        return Err(ExtractError::EmptySelection);
    }
    let rows: Vec<Vec<f32>> = samples
        .par_iter()
        .map(|s| {
            load_prepared(s, bands, pipeline)
                .and_then(|img| extractor.extract(&img))
                .map_err(|e| ExtractError::Sample {
                    id: s.id.clone(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<_, _>>()?;
    let ids = samples.iter().map(|s| s.id.clone()).collect();
    let labels = samples.iter().map(|s| s.label.clone()).collect();
    FeatureMatrix::from_rows(rows, ids, labels)
}

/// Writes the values as `RSEMB1` and the ids as a line-per-row sidecar.
pub fn export_embeddings(
    matrix: &FeatureMatrix,
    values_path: &Path,
    ids_path: &Path,
) -> Result<(), ExtractError> {
    let mut buf = Vec::with_capacity(15 + 4 * matrix.values.len());
    buf.extend_from_slice(EMBEDDING_MAGIC);
    buf.extend_from_slice(&(matrix.rows() as u32).to_le_bytes());
    buf.extend_from_slice(&(matrix.dim as u32).to_le_bytes());
    for v in &matrix.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(values_path, buf).map_err(|e| ExtractError::io(values_path, e))?;
    let mut ids = matrix.ids.join("\n");
    if !ids.is_empty() {
        ids.push('\n');
    }
    std::fs::write(ids_path, ids).map_err(|e| ExtractError::io(ids_path, e))
}

/// Raw `RSEMB1` contents: `(d, values, ids)`.
pub fn read_embedding_files(
    values_path: &Path,
    ids_path: &Path,
) -> Result<(usize, Vec<f32>, Vec<String>), ExtractError> {
    let bytes = std::fs::read(values_path).map_err(|e| ExtractError::io(values_path, e))?;
    let header = EMBEDDING_MAGIC.len() + 8;
    if bytes.len() < header || &bytes[..EMBEDDING_MAGIC.len()] != EMBEDDING_MAGIC {
        return Err(ExtractError::MagicMismatch(values_path.to_path_buf()));
    }
    let n = u32::from_le_bytes(bytes[7..11].try_into().unwrap()) as usize;
    let d = u32::from_le_bytes(bytes[11..15].try_into().unwrap()) as usize;
    if bytes.len() != header + 4 * n * d {
        return Err(ExtractError::DimensionInconsistent(format!(
            "{}: header says {n}x{d} but payload has {} bytes",
            values_path.display(),
            bytes.len() - header
        )));
    }
    let values: Vec<f32> = bytes[header..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let text = std::fs::read_to_string(ids_path).map_err(|e| ExtractError::io(ids_path, e))?;
    let ids: Vec<String> = text
        .lines()
        .map(|l| l.trim_end_matches('\r').to_string())
        .filter(|l| !l.is_empty())
        .collect();
    if ids.len() != n {
        return Err(ExtractError::DimensionInconsistent(format!(
            "{} ids for {n} embedding rows",
            ids.len()
        )));
    }
    Ok((d, values, ids))
}

/// Reads externally computed embeddings and joins labels from the manifest.
pub fn import_embeddings(
    values_path: &Path,
    ids_path: &Path,
    manifest: &DatasetManifest,
) -> Result<FeatureMatrix, ExtractError> {
    let (d, values, ids) = read_embedding_files(values_path, ids_path)?;
    let index: std::collections::HashMap<&str, &Label> = manifest
        .samples
        .iter()
        .map(|s| (s.id.as_str(), &s.label))
        .collect();
    let labels = ids
        .iter()
        .map(|id| {
            index
                .get(id.as_str())
                .map(|l| (*l).clone())
                .ok_or_else(|| ExtractError::UnknownId(id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    FeatureMatrix::new(d, values, ids, labels)
}

/// Writes `id,label,f0,f1,...` with labels in manifest CSV encoding.
pub fn write_embeddings_csv(matrix: &FeatureMatrix, path: &Path) -> Result<(), ExtractError> {
    let to_io = |e: csv::Error| ExtractError::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend((0..matrix.dim).map(|j| format!("f{j}")));
    w.write_record(&header).map_err(to_io)?;
    for i in 0..matrix.rows() {
        let mut rec = vec![matrix.ids[i].clone(), matrix.labels[i].encode()];
        rec.extend(matrix.row(i).iter().map(f32::to_string));
        w.write_record(&rec).map_err(to_io)?;
    }
    w.flush().map_err(|e| ExtractError::io(path, e))
}

/// Reads `id,f0,f1,...` (an optional `label` second column is ignored) and
/// joins labels from the manifest.
pub fn read_embeddings_csv(path: &Path, manifest: &DatasetManifest) -> Result<FeatureMatrix, ExtractError> {
    let to_io = |e: csv::Error| ExtractError::io(path, e.into());
    let mut r = csv::Reader::from_path(path).map_err(to_io)?;
    let headers = r.headers().map_err(to_io)?.clone();
    if headers.get(0).map(str::trim) != Some("id") {
        return Err(ExtractError::DimensionInconsistent(format!(
            "{}: first column must be id",
            path.display()
        )));
    }
    let skip = if headers.get(1).map(str::trim) == Some("label") { 2 } else { 1 };
    let dim = headers.len() - skip;
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(to_io)?;
        ids.push(record[0].to_string());
        for field in record.iter().skip(skip) {
            let v = field.trim().parse::<f32>().map_err(|_| {
                ExtractError::DimensionInconsistent(format!(
                    "{} line {}: {field:?} is not a number",
                    path.display(),
                    line + 2
                ))
            })?;
            values.push(v);
        }
    }
    let index: std::collections::HashMap<&str, &Label> =
        manifest.samples.iter().map(|s| (s.id.as_str(), &s.label)).collect();
    let labels = ids
        .iter()
        .map(|id| index.get(id.as_str()).map(|l| (*l).clone()).ok_or_else(|| ExtractError::UnknownId(id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    FeatureMatrix::new(dim, values, ids, labels)
}
