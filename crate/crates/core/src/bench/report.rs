use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::runner::BenchmarkResult;
use super::BenchError;
use crate::manifest::Task;

/// Mean over runs with the sample standard deviation; `std` is absent when
/// there was a single run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: Option<f64>,
    pub runs: usize,
}

impl MetricSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = (n > 1).then(|| {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        });
        Self { mean, std, runs: n }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub dataset: String,
    pub bands: String,
    pub pipeline: String,
    pub extractor: String,
    pub k: usize,
    pub task: Task,
    /// Keyed by metric name (`oa`, `f1_micro`, `f1_macro`, `map`).
    pub metrics: BTreeMap<String, MetricSummary>,
}

/// Metrics shown in tables and deltas for a task.
pub fn headline_metrics(task: Task) -> &'static [&'static str] {
    match task {
        Task::Multiclass => &["oa"],
        Task::Multilabel => &["f1_micro", "map"],
    }
}

fn metric_label(name: &str) -> &str {
    match name {
        "oa" => "OA",
        "f1_micro" => "F1",
        "f1_macro" => "macro-F1",
        "map" => "mAP",
        other => other,
    }
}

type GroupKey = (String, String, String, String, usize);

/// Groups successful rows by everything except the seed. Values are
/// combined in seed order, so the output does not depend on row order.
pub fn aggregate(results: &[BenchmarkResult]) -> Vec<AggregateRow> {
    let mut versions: Vec<&str> = results.iter().map(|r| r.toolkit_version.as_str()).collect();
    versions.sort_unstable();
    versions.dedup();
    if versions.len() > 1 {
        log::warn!("results mix toolkit versions {versions:?}");
    }
    let mut groups: BTreeMap<GroupKey, Vec<&BenchmarkResult>> = BTreeMap::new();
    for r in results.iter().filter(|r| r.succeeded()) {
        let k = &r.key;
        groups
            .entry((k.dataset.clone(), k.bands.clone(), k.pipeline.clone(), k.extractor.clone(), k.k))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((dataset, bands, pipeline, extractor, k), mut rows)| {
            rows.sort_by_key(|r| r.key.seed);
            let task = rows[0].report.as_ref().expect("succeeded").task;
            let mut metrics = BTreeMap::new();
            for name in ["oa", "f1_micro", "f1_macro", "map"] {
                let values: Vec<f64> = rows
                    .iter()
                    .filter_map(|r| r.report.as_ref().and_then(|m| m.metric(name)))
                    .collect();
                if !values.is_empty() {
                    metrics.insert(name.to_string(), MetricSummary::from_values(&values));
                }
            }
            AggregateRow {
                dataset,
                bands,
                pipeline,
                extractor,
                k,
                task,
                metrics,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRow {
    pub dataset: String,
    pub extractor: String,
    pub bands: String,
    pub k: usize,
    pub metric: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub delta: f64,
}

/// `mean(b) − mean(a)` for every (dataset, extractor, bands, k) group that
/// ran under pipeline `a`. Each must also have run under `b`.
pub fn delta_report(results: &[BenchmarkResult], a: &str, b: &str) -> Result<Vec<DeltaRow>, BenchError> {
    let rows = aggregate(results);
    let index: BTreeMap<(&str, &str, &str, &str, usize), &AggregateRow> = rows
        .iter()
        .map(|r| ((r.dataset.as_str(), r.extractor.as_str(), r.bands.as_str(), r.pipeline.as_str(), r.k), r))
        .collect();
    let mut out = Vec::new();
    for (&(dataset, extractor, bands, pipeline, k), row_a) in &index {
        if pipeline != a {
            if pipeline == b && !index.contains_key(&(dataset, extractor, bands, a, k)) {
                return Err(BenchError::MissingCounterpart(format!(
                    "{dataset}/{bands}/{extractor} has no {a} results"
                )));
            }
            continue;
        }
        let row_b = index.get(&(dataset, extractor, bands, b, k)).ok_or_else(|| {
            BenchError::MissingCounterpart(format!("{dataset}/{bands}/{extractor} has no {b} results"))
        })?;
        for &metric in headline_metrics(row_a.task) {
            if let (Some(ma), Some(mb)) = (row_a.metrics.get(metric), row_b.metrics.get(metric)) {
                out.push(DeltaRow {
                    dataset: dataset.into(),
                    extractor: extractor.into(),
                    bands: bands.into(),
                    k,
                    metric: metric.into(),
                    mean_a: ma.mean,
                    mean_b: mb.mean,
                    delta: mb.mean - ma.mean,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(BenchError::MissingCounterpart(format!("no results under pipeline {a}")));
    }
    Ok(out)
}

pub fn delta_csv(rows: &[DeltaRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dataset", "extractor", "bands", "k", "metric", "mean_a", "mean_b", "delta"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.extractor.clone(),
            r.bands.clone(),
            r.k.to_string(),
            r.metric.clone(),
            format!("{:.4}", r.mean_a),
            format!("{:.4}", r.mean_b),
            format!("{:.4}", r.delta),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Horizontal text bars, `+` for gains and `-` for losses, scaled to the
/// largest absolute delta.
pub fn delta_bars(rows: &[DeltaRow]) -> String {
    const WIDTH: f64 = 40.0;
    let labels: Vec<String> = rows
        .iter()
        .map(|r| format!("{} {} {} {}", r.dataset, r.bands, r.extractor, metric_label(&r.metric)))
        .collect();
    let pad = labels.iter().map(String::len).max().unwrap_or(0);
    let scale = rows.iter().map(|r| r.delta.abs()).fold(0.0, f64::max);
    let mut out = String::new();
    for (label, r) in labels.iter().zip(rows) {
        let n = if scale > 0.0 {
            (r.delta.abs() / scale * WIDTH).round() as usize
        } else {
            0
        };
        let bar = if r.delta < 0.0 { "-" } else { "+" }.repeat(n);
        writeln!(out, "{label:<pad$}  {:>+8.2}  {bar}", r.delta).expect("string write");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Markdown,
    Csv,
}

impl std::str::FromStr for TableFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Self::Markdown),
            "csv" => Ok(Self::Csv),
            other => Err(BenchError::Config(format!("unknown table format {other:?}"))),
        }
    }
}

/// Display name and weight/initialization columns for an extractor key.
pub fn extractor_columns(key: &str) -> (String, String) {
    let (kind, params) = match key.split_once('(') {
        Some((kind, rest)) => (kind, rest.trim_end_matches(')')),
        None => (key, ""),
    };
    let rcf = || {
        if params == "F=512,k=3" {
            "RCF".to_string()
        } else {
            format!("RCF ({})", params.replace(',', ", "))
        }
    };
    match kind {
        "image_statistics" => ("Image Stat.".into(), "-".into()),
        "rcf_random" => (rcf(), "Random".into()),
        "rcf_empirical" => (rcf(), "Empirical".into()),
        "import" => (params.to_string(), "imported".into()),
        _ => (key.to_string(), "-".into()),
    }
}

fn extractor_rank(key: &str) -> usize {
    ["image_statistics", "rcf_random", "rcf_empirical", "import"]
        .iter()
        .position(|p| key.starts_with(p))
        .unwrap_or(4)
}

fn fmt_summary(s: &MetricSummary) -> String {
    match s.std {
        Some(std) => format!("{:.2} ± {std:.2}", s.mean),
        None => format!("{:.2}", s.mean),
    }
}

/// (extractor, pipeline)
type RowKey<'a> = (&'a str, &'a str);

struct Table<'a> {
    dataset: &'a str,
    k: usize,
    /// (bands, metric)
    columns: Vec<(&'a str, &'static str)>,
    rows: Vec<(RowKey<'a>, Vec<Option<MetricSummary>>)>,
}

fn build_tables(rows: &[AggregateRow]) -> Vec<Table<'_>> {
    let mut by_dataset: BTreeMap<(&str, usize), Vec<&AggregateRow>> = BTreeMap::new();
    for r in rows {
        by_dataset.entry((r.dataset.as_str(), r.k)).or_default().push(r);
    }
    by_dataset
        .into_iter()
        .map(|((dataset, k), group)| {
            let mut columns: Vec<(&str, &'static str)> = Vec::new();
            for r in &group {
                for &m in headline_metrics(r.task) {
                    if !columns.contains(&(r.bands.as_str(), m)) {
                        columns.push((r.bands.as_str(), m));
                    }
                }
            }
            columns.sort();
            let mut keys: Vec<(&str, &str)> =
                group.iter().map(|r| (r.extractor.as_str(), r.pipeline.as_str())).collect();
            keys.sort_by(|a, b| {
                (extractor_rank(a.0), a.0, a.1).cmp(&(extractor_rank(b.0), b.0, b.1))
            });
            keys.dedup();
            let table_rows = keys
                .into_iter()
                .map(|(ext, pipe)| {
                    let cells = columns
                        .iter()
                        .map(|&(bands, metric)| {
                            group
                                .iter()
                                .find(|r| r.extractor == ext && r.pipeline == pipe && r.bands == bands)
                                .and_then(|r| r.metrics.get(metric).copied())
                        })
                        .collect();
                    ((ext, pipe), cells)
                })
                .collect();
            Table {
                dataset,
                k,
                columns,
                rows: table_rows,
            }
        })
        .collect()
}

/// One table per (dataset, k): rows are extractor × pipeline, columns are
/// band set × headline metric. In markdown the best value of each column is
/// bold and the second best italic, compared at display precision.
pub fn render_table(rows: &[AggregateRow], format: TableFormat) -> Result<String, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    let tables = build_tables(rows);
    match format {
        TableFormat::Markdown => Ok(render_markdown(&tables)),
        TableFormat::Csv => Ok(render_csv(&tables)),
    }
}

fn render_markdown(tables: &[Table<'_>]) -> String {
    let mut out = String::new();
    for (t_i, t) in tables.iter().enumerate() {
        if t_i > 0 {
            out.push('\n');
        }
        writeln!(out, "#### {} (k={})\n", t.dataset, t.k).expect("string write");
        let mut header = vec!["Extractor".to_string(), "Weights/Init".into(), "Size".into()];
        header.extend(t.columns.iter().map(|(b, m)| format!("{b} {}", metric_label(m))));
        writeln!(out, "| {} |", header.join(" | ")).expect("string write");
        writeln!(out, "|{}", "---|".repeat(header.len())).expect("string write");

        // rank distinct rounded means per column
        let ranks: Vec<(Option<i64>, Option<i64>)> = (0..t.columns.len())
            .map(|c| {
                let mut v: Vec<i64> = t
                    .rows
                    .iter()
                    .filter_map(|(_, cells)| cells[c].map(|s| (s.mean * 100.0).round() as i64))
                    .collect();
                v.sort_unstable_by(|a, b| b.cmp(a));
                v.dedup();
                (v.first().copied(), v.get(1).copied())
            })
            .collect();
        for ((ext, pipe), cells) in &t.rows {
            let (name, init) = extractor_columns(ext);
            let mut line = vec![name, init, pipe.to_string()];
            for (c, cell) in cells.iter().enumerate() {
                line.push(match cell {
                    None => "-".into(),
                    Some(s) => {
                        let text = fmt_summary(s);
                        let r = Some((s.mean * 100.0).round() as i64);
                        if r == ranks[c].0 {
                            format!("**{text}**")
                        } else if r == ranks[c].1 {
                            format!("*{text}*")
                        } else {
                            text
                        }
                    }
                });
            }
            writeln!(out, "| {} |", line.join(" | ")).expect("string write");
        }
    }
    out
}

fn render_csv(tables: &[Table<'_>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // all tables share one header in CSV form
    let mut columns: Vec<(&str, &str)> = tables.iter().flat_map(|t| t.columns.iter().copied()).collect();
    columns.sort();
    columns.dedup();
    let mut header: Vec<String> = ["dataset", "k", "extractor", "weights", "size"]
        .map(String::from)
        .to_vec();
    for (b, m) in &columns {
        header.push(format!("{b}_{m}"));
        header.push(format!("{b}_{m}_std"));
    }
    w.write_record(&header).expect("in-memory write");
    for t in tables {
        for ((ext, pipe), cells) in &t.rows {
            let (name, init) = extractor_columns(ext);
            let mut rec = vec![t.dataset.to_string(), t.k.to_string(), name, init, pipe.to_string()];
            for col in &columns {
                let cell = t
                    .columns
                    .iter()
                    .position(|c| c == col)
                    .and_then(|i| cells[i]);
                rec.push(cell.map_or(String::new(), |s| format!("{:.4}", s.mean)));
                rec.push(cell.and_then(|s| s.std).map_or(String::new(), |s| format!("{s:.4}")));
            }
            w.write_record(&rec).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}
