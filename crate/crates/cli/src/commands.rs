use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rsbench_core::bench::{
    aggregate, delta_bars, delta_csv, delta_report, read_results, render_table, run_benchmark,
    BenchError, BenchmarkConfig, MinMaxKind, StepConfig, TableFormat, RESULTS_FILE,
};
use rsbench_core::datasets::{
    build_manifest, compute_channel_stats, generate_synthetic, verify_manifest, write_stats_preset,
    AdapterSpec, SyntheticSpec,
};
use rsbench_core::extract::{
    export_embeddings, extract_features, import_embeddings, load_prepared, rcf_init_empirical,
    rcf_init_random, read_embeddings_csv, sample_patches, write_embeddings_csv, zca_fit, Extractor,
    RcfBank, ZcaEpsilon, DEFAULT_FEATURES, DEFAULT_KERNEL, PATCHES_PER_FEATURE,
};
use rsbench_core::{DatasetManifest, Pipeline, Split, Task};

use crate::{Failure, Global};

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

fn bench_failure(e: BenchError) -> Failure {
    match e {
        BenchError::Config(m) => Failure::Config(m),
        other => data(other),
    }
}

fn output_dir(g: &Global) -> Result<&Path, Failure> {
    let dir = g
        .output
        .as_deref()
        .ok_or_else(|| Failure::Config("--output <dir> is required".into()))?;
    std::fs::create_dir_all(dir).map_err(|e| data(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn load_manifest(path: &Path, verify: bool) -> Result<DatasetManifest, Failure> {
    let manifest = DatasetManifest::read_csv(path, None).map_err(data)?;
    if verify {
        verify_manifest(&manifest).map_err(data)?;
    }
    Ok(manifest)
}

/// Parses `--step` values: `reflectance[=D]`, `resize=N` or `resize=HxW`,
/// `minmax` or `minmax=LO:HI`, `standardize=imagenet|<preset.csv>`,
/// `percentile[=LO:HI]`.
pub(crate) fn parse_step(text: &str) -> Result<StepConfig, String> {
    let (op, arg) = match text.split_once('=') {
        Some((op, arg)) => (op.trim(), Some(arg.trim())),
        None => (text.trim(), None),
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("step {text:?}: {s:?} is not a number"));
    let pair = |s: &str| -> Result<(f64, f64), String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("step {text:?}: expected LO:HI"))?;
        Ok((num(a)?, num(b)?))
    };
    match (op, arg) {
        ("reflectance", None) => Ok(StepConfig::Reflectance { divisor: 10_000.0 }),
        ("reflectance", Some(d)) => Ok(StepConfig::Reflectance { divisor: num(d)? as f32 }),
        ("resize", Some(size)) => {
            let (h, w) = size.split_once('x').unwrap_or((size, size));
            let dim = |s: &str| s.parse::<usize>().map_err(|_| format!("step {text:?}: bad size"));
            Ok(StepConfig::Resize {
                height: dim(h)?,
                width: dim(w)?,
            })
        }
        ("minmax", None) => Ok(StepConfig::Minmax {
            scope: MinMaxKind::PerImage,
            lo: None,
            hi: None,
        }),
        ("minmax", Some(r)) => {
            let (lo, hi) = pair(r)?;
            Ok(StepConfig::Minmax {
                scope: MinMaxKind::Fixed,
                lo: Some(lo as f32),
                hi: Some(hi as f32),
            })
        }
        ("standardize", Some(p)) => Ok(StepConfig::Standardize {
            preset: Some(p.to_string()),
            means: None,
            stds: None,
        }),
        ("percentile", None) => Ok(StepConfig::Percentile { lo: 2.0, hi: 98.0 }),
        ("percentile", Some(r)) => {
            let (lo, hi) = pair(r)?;
            Ok(StepConfig::Percentile { lo, hi })
        }
        _ => Err(format!("unknown step {text:?}")),
    }
}

fn build_pipeline(steps: &[String]) -> Result<Pipeline, Failure> {
    let steps = steps
        .iter()
        .map(|s| parse_step(s).map_err(Failure::Config)?.to_step().map_err(bench_failure))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Pipeline::new(steps))
}

fn bands(list: &[usize]) -> Option<&[usize]> {
    (!list.is_empty()).then_some(list)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub(crate) enum DatasetKind {
    Eurosat,
    Ucm,
    Resisc45,
    GenericManifest,
    Synthetic,
}

#[derive(Args, Debug)]
pub(crate) struct ManifestArgs {
    /// Dataset adapter; defaults to the config's dataset
    #[arg(long, value_enum)]
    dataset: Option<DatasetKind>,
    /// Dataset root (folder-per-class tree or manifest CSV)
    #[arg(long)]
    root: Option<PathBuf>,
    /// Directory holding the split list files [default: the root]
    #[arg(long)]
    splits: Option<PathBuf>,
    /// Synthetic: number of classes
    #[arg(long, default_value_t = 5)]
    classes: usize,
    /// Synthetic: samples per class
    #[arg(long, default_value_t = 200)]
    per_class: usize,
    /// Synthetic: bands per image
    #[arg(long, default_value_t = 4)]
    channels: usize,
    /// Synthetic: image height and width
    #[arg(long, default_value_t = 64)]
    size: usize,
    /// Synthetic: class-mean spacing in noise standard deviations
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    /// Synthetic: 1-3 labels per sample instead of one
    #[arg(long)]
    multilabel: bool,
}

pub(crate) fn manifest_build(g: &Global, a: &ManifestArgs) -> Result<(), Failure> {
    let out = output_dir(g)?;
    let spec = match a.dataset {
        None => {
            let path = g
                .config
                .as_deref()
                .ok_or_else(|| Failure::Config("give --dataset or --config".into()))?;
            BenchmarkConfig::from_file(path).map_err(bench_failure)?.dataset
        }
        Some(DatasetKind::Synthetic) => {
            let spec = SyntheticSpec {
                task: if a.multilabel { Task::Multilabel } else { Task::Multiclass },
                ..SyntheticSpec::multiclass(a.classes, a.per_class, a.channels, a.size, a.separation, g.seed.unwrap_or(0))
            };
            let manifest = generate_synthetic(&spec, out).map_err(data)?;
            println!("{} samples, {} classes -> {}", manifest.samples.len(), manifest.num_classes(), out.display());
            return Ok(());
        }
        Some(kind) => {
            let root = a
                .root
                .clone()
                .ok_or_else(|| Failure::Config("--root is required".into()))?;
            let splits = a.splits.clone();
            match kind {
                DatasetKind::Eurosat => AdapterSpec::Eurosat { root, splits },
                DatasetKind::Ucm => AdapterSpec::Ucm { root, splits },
                DatasetKind::Resisc45 => AdapterSpec::Resisc45 { root, splits },
                DatasetKind::GenericManifest => AdapterSpec::GenericManifest { root, task: None },
                DatasetKind::Synthetic => unreachable!("handled above"),
            }
        }
    };
    let manifest = build_manifest(&spec).map_err(data)?;
    if g.verify {
        verify_manifest(&manifest).map_err(data)?;
    }
    let path = manifest.write_to_dir(out).map_err(data)?;
    println!("{} samples, {} classes -> {}", manifest.samples.len(), manifest.num_classes(), path.display());
    Ok(())
}

#[derive(Args, Debug)]
pub(crate) struct StatsArgs {
    /// Manifest CSV
    #[arg(long)]
    manifest: PathBuf,
    /// Band indices to keep, e.g. 3,2,1 [default: all]
    #[arg(long, value_delimiter = ',')]
    bands: Vec<usize>,
    /// Preprocessing step applied before accumulating (repeatable)
    #[arg(long = "step")]
    steps: Vec<String>,
    #[arg(long, default_value = "train")]
    split: Split,
}

pub(crate) fn stats_compute(g: &Global, a: &StatsArgs) -> Result<(), Failure> {
    let manifest = load_manifest(&a.manifest, g.verify)?;
    let pipeline = build_pipeline(&a.steps)?;
    let stats = compute_channel_stats(&manifest, a.split, bands(&a.bands), &pipeline).map_err(data)?;
    println!("channel,mean,std");
    for (c, (m, s)) in stats.means.iter().zip(&stats.stds).enumerate() {
        println!("{c},{m},{s}");
    }
    if g.output.is_some() {
        let path = output_dir(g)?.join("stats.csv");
        write_stats_preset(&stats, &path).map_err(data)?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub(crate) enum ExtractorKind {
    ImageStatistics,
    RcfRandom,
    RcfEmpirical,
}

#[derive(Args, Debug)]
pub(crate) struct ExtractArgs {
    /// Manifest CSV
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum, default_value = "image-statistics")]
    extractor: ExtractorKind,
    /// Feature count for RCF extractors
    #[arg(long, default_value_t = DEFAULT_FEATURES)]
    features: usize,
    /// Kernel size for RCF extractors
    #[arg(long, default_value_t = DEFAULT_KERNEL)]
    kernel: usize,
    /// Candidate patches for empirical filters [default: 16 per feature]
    #[arg(long)]
    n_patches: Option<usize>,
    /// Absolute whitening epsilon [default: 1e-6 x mean eigenvalue]
    #[arg(long)]
    epsilon: Option<f64>,
    /// Bias added before rectification
    #[arg(long, default_value_t = 0.0)]
    bias: f32,
    /// Reuse a saved filter bank instead of initializing one
    #[arg(long)]
    bank: Option<PathBuf>,
    /// Band indices to keep [default: all]
    #[arg(long, value_delimiter = ',')]
    bands: Vec<usize>,
    /// Preprocessing step (repeatable, applied in order)
    #[arg(long = "step")]
    steps: Vec<String>,
    /// Splits to extract
    #[arg(long, value_delimiter = ',', default_value = "train,val,test")]
    splits: Vec<Split>,
}

pub(crate) fn extract(g: &Global, a: &ExtractArgs) -> Result<(), Failure> {
    let out = output_dir(g)?;
    let manifest = load_manifest(&a.manifest, g.verify)?;
    let pipeline = build_pipeline(&a.steps)?;
    let band_sel = bands(&a.bands);
    let seed = g.seed.unwrap_or(0);
    let bank: Option<RcfBank> = match (a.extractor, &a.bank) {
        (ExtractorKind::ImageStatistics, _) => None,
        (_, Some(path)) => Some(RcfBank::load(path).map_err(data)?),
        (ExtractorKind::RcfRandom, None) => {
            let first = manifest
                .split(Split::Train)
                .next()
                .ok_or_else(|| data("manifest has no train samples"))?;
            let channels = load_prepared(first, band_sel, &pipeline).map_err(data)?.channels();
            Some(rcf_init_random(channels, a.features, a.kernel, seed).map_err(data)?)
        }
        (ExtractorKind::RcfEmpirical, None) => {
            let n = a.n_patches.unwrap_or(PATCHES_PER_FEATURE * a.features);
            let patches =
                sample_patches(&manifest, band_sel, &pipeline, a.kernel, n, seed).map_err(data)?;
            let eps = a.epsilon.map_or_else(ZcaEpsilon::default, ZcaEpsilon::Absolute);
            let zca = zca_fit(&patches, eps).map_err(data)?;
            let channels = patches.dim() / (a.kernel * a.kernel);
            Some(rcf_init_empirical(&patches, &zca, channels, a.features, seed).map_err(data)?)
        }
    };
    let bank = bank.map(|b| if a.bank.is_some() { b } else { b.with_bias(a.bias) });
    let extractor = match &bank {
        Some(b) => {
            let path = out.join("bank.rcf");
            b.save(&path).map_err(data)?;
            log::info!("wrote {}", path.display());
            Extractor::Rcf(b)
        }
        None => Extractor::ImageStatistics,
    };
    let splits: Vec<Split> = a
        .splits
        .iter()
        .copied()
        .filter(|s| manifest.split(*s).next().is_some())
        .collect();
    let features = extract_features(&manifest, band_sel, &pipeline, extractor, &splits).map_err(data)?;
    let (values, ids) = (out.join("features.emb"), out.join("features.ids"));
    export_embeddings(&features, &values, &ids).map_err(data)?;
    println!("{} x {} -> {}", features.rows(), features.dim(), values.display());
    Ok(())
}

#[derive(Args, Debug)]
pub(crate) struct ImportArgs {
    /// CSV with an `id` column followed by feature columns
    #[arg(long)]
    csv: PathBuf,
    /// Manifest whose ids the CSV uses
    #[arg(long)]
    manifest: PathBuf,
}

pub(crate) fn embeddings_import(g: &Global, a: &ImportArgs) -> Result<(), Failure> {
    let out = output_dir(g)?;
    let manifest = load_manifest(&a.manifest, false)?;
    let m = read_embeddings_csv(&a.csv, &manifest).map_err(data)?;
    let (values, ids) = (out.join("embeddings.emb"), out.join("embeddings.ids"));
    export_embeddings(&m, &values, &ids).map_err(data)?;
    println!("{} x {} -> {}", m.rows(), m.dim(), values.display());
    Ok(())
}

#[derive(Args, Debug)]
pub(crate) struct ExportArgs {
    /// Embedding values file (RSEMB1)
    #[arg(long)]
    values: PathBuf,
    /// Row id sidecar, one id per line
    #[arg(long)]
    ids: PathBuf,
    /// Manifest providing labels
    #[arg(long)]
    manifest: PathBuf,
}

pub(crate) fn embeddings_export(g: &Global, a: &ExportArgs) -> Result<(), Failure> {
    let out = output_dir(g)?;
    let manifest = load_manifest(&a.manifest, false)?;
    let m = import_embeddings(&a.values, &a.ids, &manifest).map_err(data)?;
    let path = out.join("embeddings.csv");
    write_embeddings_csv(&m, &path).map_err(data)?;
    println!("{} x {} -> {}", m.rows(), m.dim(), path.display());
    Ok(())
}

#[derive(Args, Debug)]
pub(crate) struct EvaluateArgs {
    /// Manifest providing labels and splits
    #[arg(long)]
    manifest: PathBuf,
    /// Embedding values file (RSEMB1)
    #[arg(long)]
    values: PathBuf,
    /// Row id sidecar, one id per line
    #[arg(long)]
    ids: PathBuf,
    /// Neighbors
    #[arg(long, default_value_t = rsbench_core::eval::DEFAULT_K)]
    k: usize,
}

pub(crate) fn evaluate(g: &Global, a: &EvaluateArgs) -> Result<(), Failure> {
    let manifest = load_manifest(&a.manifest, false)?;
    let all = import_embeddings(&a.values, &a.ids, &manifest).map_err(data)?;
    let split: Vec<Option<Split>> = all.ids().iter().map(|id| manifest.find(id).map(|s| s.split)).collect();
    let train = all.select(|i| split[i] == Some(Split::Train));
    let test = all.select(|i| split[i] == Some(Split::Test));
    let report = rsbench_core::evaluate(&train, &test, a.k).map_err(data)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{json}");
    if g.output.is_some() {
        let path = output_dir(g)?.join("metrics.json");
        std::fs::write(&path, json + "\n").map_err(|e| data(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn load_config(g: &Global) -> Result<BenchmarkConfig, Failure> {
    let path = g
        .config
        .as_deref()
        .ok_or_else(|| Failure::Config("--config <path> is required".into()))?;
    let mut config = BenchmarkConfig::from_file(path).map_err(bench_failure)?;
    if let Some(out) = &g.output {
        config.output_dir = out.clone();
    }
    if let Some(seed) = g.seed {
        config.seeds = vec![seed];
    }
    Ok(config)
}

pub(crate) fn benchmark_run(g: &Global) -> Result<(), Failure> {
    let config = load_config(g)?;
    if g.verify {
        let manifest = build_manifest(&config.dataset).map_err(data)?;
        verify_manifest(&manifest).map_err(data)?;
    }
    let summary = run_benchmark(&config).map_err(bench_failure)?;
    println!(
        "{} cells: {} run, {} already done, {} failed -> {}",
        summary.results.len(),
        summary.executed,
        summary.skipped,
        summary.failed,
        config.output_dir.join(RESULTS_FILE).display()
    );
    if summary.failed > 0 {
        return Err(Failure::Cells(summary.failed));
    }
    Ok(())
}

fn results_path(g: &Global, explicit: &Option<PathBuf>) -> Result<PathBuf, Failure> {
    match explicit {
        Some(p) => Ok(p.clone()),
        None => Ok(load_config(g)?.output_dir.join(RESULTS_FILE)),
    }
}

#[derive(Args, Debug)]
pub(crate) struct TableArgs {
    /// Results file [default: from --config]
    #[arg(long)]
    results: Option<PathBuf>,
    /// markdown or csv
    #[arg(long, default_value = "markdown")]
    format: TableFormat,
}

pub(crate) fn report_table(g: &Global, a: &TableArgs) -> Result<(), Failure> {
    let path = results_path(g, &a.results)?;
    let rows = aggregate(&read_results(&path).map_err(data)?);
    let text = render_table(&rows, a.format).map_err(data)?;
    print!("{text}");
    if g.output.is_some() {
        let name = match a.format {
            TableFormat::Markdown => "table.md",
            TableFormat::Csv => "table.csv",
        };
        let out = output_dir(g)?.join(name);
        std::fs::write(&out, &text).map_err(|e| data(format!("{}: {e}", out.display())))?;
    }
    Ok(())
}

#[derive(Args, Debug)]
pub(crate) struct DeltaArgs {
    /// Results file [default: from --config]
    #[arg(long)]
    results: Option<PathBuf>,
    /// Baseline pipeline name
    #[arg(long)]
    a: String,
    /// Compared pipeline name
    #[arg(long)]
    b: String,
}

pub(crate) fn report_delta(g: &Global, a: &DeltaArgs) -> Result<(), Failure> {
    let path = results_path(g, &a.results)?;
    let rows = delta_report(&read_results(&path).map_err(data)?, &a.a, &a.b).map_err(data)?;
    print!("{}", delta_bars(&rows));
    if g.output.is_some() {
        let out = output_dir(g)?.join("delta.csv");
        std::fs::write(&out, delta_csv(&rows)).map_err(|e| data(format!("{}: {e}", out.display())))?;
    }
    Ok(())
}
