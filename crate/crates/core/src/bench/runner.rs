use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{expand_template, hash_json, BenchmarkConfig, ExtractorConfig};
use super::BenchError;
use crate::datasets::build_manifest;
use crate::eval::{evaluate, MetricReport};
use crate::extract::{
    extract_features, import_embeddings, load_prepared, rcf_init_empirical, rcf_init_random,
    sample_patches, zca_fit, Extractor, FeatureMatrix, RcfBank,
};
use crate::manifest::{DatasetManifest, Split};
use crate::preprocess::Pipeline;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const RESULTS_FILE: &str = "results.jsonl";

/// Identifies one benchmark cell. `seed` is `None` for deterministic extractors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub dataset: String,
    pub bands: String,
    pub pipeline: String,
    pub extractor: String,
    pub seed: Option<u64>,
    pub k: usize,
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{}/{}", self.dataset, self.bands, self.pipeline, self.extractor)?;
        if let Some(seed) = self.seed {
            write!(f, "/seed={seed}")?;
        }
        write!(f, "/k={}", self.k)
    }
}

/// Conventions a reader needs to interpret the numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMetadata {
    /// Spread over seeds in aggregated tables.
    pub seed_std: String,
    pub multilabel_rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_patches: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub key: CellKey,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time: f64,
    pub toolkit_version: String,
    pub config_hash: String,
    /// Hash of everything that determines this cell's numbers.
    pub cell_hash: String,
    pub metadata: ResultMetadata,
}

impl BenchmarkResult {
    pub fn succeeded(&self) -> bool {
        self.report.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    /// One row per configured cell, in plan order.
    pub results: Vec<BenchmarkResult>,
    pub executed: usize,
    pub skipped: usize,
    pub failed: usize,
}

struct Cell<'a> {
    key: CellKey,
    band_indices: Option<&'a [usize]>,
    pipeline: &'a Pipeline,
    extractor: &'a ExtractorConfig,
    hash: String,
}

fn plan<'a>(
    config: &'a BenchmarkConfig,
    pipelines: &'a std::collections::BTreeMap<String, Pipeline>,
) -> Vec<Cell<'a>> {
    let dataset = config.dataset.name();
    let mut cells = Vec::new();
    for (bands, indices) in &config.band_sets {
        for (pname, pipeline) in pipelines {
            for extractor in &config.extractors {
                let seeds: Vec<Option<u64>> = if extractor.is_stochastic() {
                    config.seeds.iter().copied().map(Some).collect()
                } else {
                    vec![None]
                };
                for seed in seeds {
                    let hash = hash_json(&serde_json::json!({
                        "dataset": config.dataset,
                        "bands": indices,
                        "pipeline": config.pipelines[pname],
                        "extractor": extractor,
                        "seed": seed,
                        "k": config.k,
                    }));
                    cells.push(Cell {
                        key: CellKey {
                            dataset: dataset.clone(),
                            bands: bands.clone(),
                            pipeline: pname.clone(),
                            extractor: extractor.key(),
                            seed,
                            k: config.k,
                        },
                        band_indices: (!indices.is_empty()).then_some(indices.as_slice()),
                        pipeline,
                        extractor,
                        hash,
                    });
                }
            }
        }
    }
    cells
}

/// Reads a results file, skipping (and logging) unparseable lines.
pub fn read_results(path: &Path) -> Result<Vec<BenchmarkResult>, BenchError> {
    let file = match std::fs::File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(BenchError::io(path, e)),
    };
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| BenchError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => out.push(r),
            Err(e) => log::warn!("{}:{}: skipping bad result line: {e}", path.display(), i + 1),
        }
    }
    Ok(out)
}

fn write_results(path: &Path, rows: &[BenchmarkResult]) -> Result<(), BenchError> {
    let mut text = String::new();
    for r in rows {
        text.push_str(&serde_json::to_string(r).expect("result serializes"));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

/// Runs every cell of `config` that has no successful row with a matching
/// cell hash in `output_dir/results.jsonl`, appending one line per cell.
/// A failing cell is recorded and the run moves on.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<RunSummary, BenchError> {
    let pipelines = config.build_pipelines()?;
    std::fs::create_dir_all(&config.output_dir).map_err(|e| BenchError::io(&config.output_dir, e))?;
    let path = config.output_dir.join(RESULTS_FILE);
    let cells = plan(config, &pipelines);

    // Keep successful rows; the planned cells they do not satisfy will rerun,
    // so drop their failed or stale rows to keep keys unique.
    let planned: HashSet<&CellKey> = cells.iter().map(|c| &c.key).collect();
    let hashes: HashMap<&CellKey, &str> = cells.iter().map(|c| (&c.key, c.hash.as_str())).collect();
    let existing = read_results(&path)?;
    let before = existing.len();
    let kept: Vec<BenchmarkResult> = existing
        .into_iter()
        .filter(|r| {
            !planned.contains(&r.key) || (r.succeeded() && hashes.get(&r.key) == Some(&r.cell_hash.as_str()))
        })
        .collect();
    if kept.len() != before {
        write_results(&path, &kept)?;
    }
    let done: HashMap<CellKey, BenchmarkResult> = kept
        .into_iter()
        .filter(|r| planned.contains(&r.key))
        .map(|r| (r.key.clone(), r))
        .collect();

    let mut manifest: Option<DatasetManifest> = None;
    let config_hash = config.config_hash();
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| BenchError::io(&path, e))?;

    let mut summary = RunSummary {
        results: Vec::with_capacity(cells.len()),
        executed: 0,
        skipped: 0,
        failed: 0,
    };
    for cell in &cells {
        if let Some(r) = done.get(&cell.key) {
            summary.skipped += 1;
            summary.results.push(r.clone());
            continue;
        }
        if manifest.is_none() {
            manifest = Some(build_manifest(&config.dataset)?);
        }
        let manifest = manifest.as_ref().expect("built above");
        log::info!("running {}", cell.key);
        let start = Instant::now();
        let outcome = run_cell(manifest, cell);
        let wall_time = start.elapsed().as_secs_f64();
        let (report, error) = match outcome {
            Ok(r) => (Some(r), None),
            Err(e) => {
                log::error!("{} failed: {e}", cell.key);
                summary.failed += 1;
                (None, Some(e.to_string()))
            }
        };
        let result = BenchmarkResult {
            key: cell.key.clone(),
            report,
            error,
            wall_time,
            toolkit_version: TOOLKIT_VERSION.into(),
            config_hash: config_hash.clone(),
            cell_hash: cell.hash.clone(),
            metadata: ResultMetadata {
                seed_std: "sample".into(),
                multilabel_rule: "neighbor_fraction>=0.5".into(),
                n_patches: cell.extractor.n_patches(),
            },
        };
        let line = serde_json::to_string(&result).expect("result serializes");
        writeln!(file, "{line}")
            .and_then(|()| file.flush())
            .map_err(|e| BenchError::io(&path, e))?;
        summary.executed += 1;
        summary.results.push(result);
    }
    Ok(summary)
}

fn split_features(
    manifest: &DatasetManifest,
    cell: &Cell<'_>,
    extractor: Extractor<'_>,
) -> Result<(FeatureMatrix, FeatureMatrix), BenchError> {
    let train = extract_features(manifest, cell.band_indices, cell.pipeline, extractor, &[Split::Train])?;
    let test = extract_features(manifest, cell.band_indices, cell.pipeline, extractor, &[Split::Test])?;
    Ok((train, test))
}

fn first_train_channels(manifest: &DatasetManifest, cell: &Cell<'_>) -> Result<usize, BenchError> {
    let sample = manifest
        .split(Split::Train)
        .next()
        .ok_or(BenchError::Config("dataset has no train samples".into()))?;
    Ok(load_prepared(sample, cell.band_indices, cell.pipeline)?.channels())
}

fn run_cell(manifest: &DatasetManifest, cell: &Cell<'_>) -> Result<MetricReport, BenchError> {
    let k = cell.key.k;
    let seed = cell.key.seed.unwrap_or(0);
    let bank: RcfBank;
    let (train, test) = match cell.extractor {
        ExtractorConfig::ImageStatistics => split_features(manifest, cell, Extractor::ImageStatistics)?,
        ExtractorConfig::RcfRandom {
            features,
            kernel,
            bias,
        } => {
            let channels = first_train_channels(manifest, cell)?;
            bank = rcf_init_random(channels, *features, *kernel, seed)?.with_bias(*bias);
            split_features(manifest, cell, Extractor::Rcf(&bank))?
        }
        ExtractorConfig::RcfEmpirical {
            features, kernel, bias, ..
        } => {
            let n = cell.extractor.n_patches().expect("empirical has a patch count");
            let patches = sample_patches(manifest, cell.band_indices, cell.pipeline, *kernel, n, seed)?;
            let zca = zca_fit(&patches, cell.extractor.zca_epsilon())?;
            let channels = patches.dim() / (kernel * kernel);
            bank = rcf_init_empirical(&patches, &zca, channels, *features, seed)?.with_bias(*bias);
            split_features(manifest, cell, Extractor::Rcf(&bank))?
        }
        ExtractorConfig::Import { values, ids, .. } => {
            let values = expand_template(values, &cell.key.bands, &cell.key.pipeline);
            let ids = expand_template(ids, &cell.key.bands, &cell.key.pipeline);
            let all = import_embeddings(Path::new(&values), Path::new(&ids), manifest)?;
            let split_of: HashMap<&str, Split> =
                manifest.samples.iter().map(|s| (s.id.as_str(), s.split)).collect();
            let splits: Vec<Option<Split>> =
                all.ids().iter().map(|id| split_of.get(id.as_str()).copied()).collect();
            (
                all.select(|i| splits[i] == Some(Split::Train)),
                all.select(|i| splits[i] == Some(Split::Test)),
            )
        }
    };
    Ok(evaluate(&train, &test, k)?)
}
