//! Driver for the `mvtc` binary: dataset files, synthetic data, the end-to-end
//! pipeline and its JSON report.

pub mod bench;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod presets;
pub mod synthetic;

pub use error::{CliError, Result};
pub use pipeline::{run_pipeline, run_source, DataSource, PipelineConfig, RunReport};
