//! Configuration, CSV schema, sweep orchestration and plot scripts.
//!
//! A sweep directory looks like
//!
//! ```text
//! <sweep>/config.txt          canonical copy of the configuration
//! <sweep>/runs.csv            one row per run
//! <sweep>/<run_id>/manifest.txt
//! <sweep>/<run_id>/timeseries.csv
//! <sweep>/kinks.csv, page_times.csv, regression.csv,
//!         exponents.csv, beta.csv, beta_runs.csv
//! <sweep>/plots/*.py
//! ```

pub mod config;
pub mod csv;
pub mod plots;
pub mod sweep;

use std::path::Path;

use thiserror::Error;

pub use config::{Config, Engine, EngineChoice, RunSpec};
pub use csv::{format_float, output_orders, read_timeseries, TimeSeries, TimeSeriesWriter};
pub use plots::emit_plots;
pub use sweep::{analyze_sweep, run_id, run_sweep, RunManifest, SweepAnalysis, SweepOptions};

use crate::analysis::AnalysisError;
use crate::model::ModelError;

fn config_message(line: usize, msg: &str) -> String {
    if line == 0 {
        format!("config: {msg}")
    } else {
        format!("config line {line}: {msg}")
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}", config_message(*line, msg))]
    Config { line: usize, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("sector dimension for L = {l}, M = {m} is {dim}, above the capacity of {capacity} states")]
    Capacity { l: usize, m: usize, dim: u128, capacity: usize },
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("{path} line {line}: {msg}")]
    Csv { path: String, line: usize, msg: String },
    #[error(transparent)]
    CsvFormat(#[from] ::csv::Error),
    #[error("run {run}: {msg}")]
    Engine { run: String, msg: String },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl IoError {
    pub fn file(path: &Path, source: std::io::Error) -> Self {
        Self::File { path: path.display().to_string(), source }
    }
}
