//! End-to-end analysis: configuration, the pipeline, and table output.

mod config;
mod pipeline;
mod table;

pub use config::AnalysisConfig;
pub use pipeline::*;
pub use table::{format_fixed, format_sig, Cell, OutputFormat, Report, Table};
