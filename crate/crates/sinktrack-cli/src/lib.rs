//! Benchmark harness for entropic optimal-transport point tracking: runs
//! simulation grids, aggregates performance indices across seeded replicates,
//! writes result CSVs and renders static SVG figures.

pub mod config;
pub mod figures;
pub mod report;
pub mod runner;

pub use config::{CliError, ExperimentConfig, Result, ResultRow, SimId};
pub use figures::{emit_figure, quartiles, svg_figure, FigureKind};
pub use report::{csv_string, emit_csv, format_sig6, parse_csv, read_csv, CSV_HEADER};
pub use runner::run_experiment;
