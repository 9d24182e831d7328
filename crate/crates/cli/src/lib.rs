//! Library side of the `ghostvar` command: configuration, CSV input and
//! output, the train/test splitter, run orchestration and figure export.

pub mod analysis;
pub mod config;
pub mod data;
pub mod error;
pub mod svg;

pub use analysis::{analyze, run_analysis, write_outputs, ReportBundle, SCHEMA_VERSION};
pub use config::{DataSource, Method, ModelSpec, RunConfig, SplitPolicy};
pub use data::{export_scenario, ingest_csv, split, split_sizes, write_csv};
pub use error::{CliError, CliResult};
