//! Benchmark sweeps over band sets, pipelines, extractors and seeds, with
//! resumable JSON-lines results and table/delta reports.

mod config;
mod report;
mod runner;

use std::path::{Path, PathBuf};

pub use config::{expand_template, BenchmarkConfig, ExtractorConfig, MinMaxKind, StepConfig};
pub use report::{
    aggregate, delta_bars, delta_csv, delta_report, extractor_columns, headline_metrics,
    render_table, AggregateRow, DeltaRow, MetricSummary, TableFormat,
};
pub use runner::{
    read_results, run_benchmark, BenchmarkResult, CellKey, ResultMetadata, RunSummary,
    RESULTS_FILE, TOOLKIT_VERSION,
};

use crate::datasets::DatasetError;
use crate::eval::EvalError;
use crate::extract::ExtractError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("missing counterpart: {0}")]
    MissingCounterpart(String),
    #[error("nothing to report")]
    EmptyInput,
    #[error("io failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl BenchError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
