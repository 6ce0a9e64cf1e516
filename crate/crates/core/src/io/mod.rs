//! Experiment files, reports and CSV tables.

pub mod csv;
pub mod experiment;
pub mod report;

pub use csv::{histogram_csv, sweep_column, sweep_csv, table_one_csv};
pub use experiment::{
    file_key, parse_experiment, ApparatusSection, ChopperName, ExperimentFile, ModeName,
    OutputSection, RunSection, SourceName, StreamSection, SCHEMA_VERSION,
};
pub use report::{experiment_from_report, ReportDocument, REPORT_SCHEMA_VERSION, TOOL};
