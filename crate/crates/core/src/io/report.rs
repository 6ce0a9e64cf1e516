//! Canonical JSON report of one run.

use serde::Serialize;

use super::experiment::ExperimentFile;
use crate::apparatus::DetectorLayout;
use crate::detection::{DetectionSummary, Metrics};
use crate::engine::{Conformance, MetricDifference, RunResult};
use crate::error::{Error, Result};
use crate::models::{ModelKind, TableOnePrediction};

pub const TOOL: &str = "lightquanta";
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Everything a run produced except timing, so equal inputs give equal bytes.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub seed: u64,
    /// The resolved experiment; feeding it back reproduces the run.
    pub echo: serde_json::Value,
    pub model: ModelKind,
    pub layout: DetectorLayout,
    pub summary: DetectionSummary,
    pub metrics: Metrics,
    pub table_row: TableOnePrediction,
    pub conformance: Conformance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photon_balance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delayed_comparison: Option<Vec<MetricDifference>>,
}

impl ReportDocument {
    pub fn new(experiment: &ExperimentFile, result: &RunResult) -> Result<Self> {
        let echo = serde_json::to_value(experiment.resolved()?)
            .map_err(|e| Error::Config(format!("cannot serialize experiment: {e}")))?;
        Ok(Self {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            schema_version: REPORT_SCHEMA_VERSION,
            seed: result.spec.seed,
            echo,
            model: result.spec.model,
            layout: result.layout,
            summary: result.summary.clone(),
            metrics: result.metrics.clone(),
            table_row: result.table_row,
            conformance: result.conformance,
            photon_balance: result.photon_balance,
            delayed_comparison: None,
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values serialize");
        s.push('\n');
        s
    }
}

/// Recover the experiment echoed in a report.
pub fn experiment_from_report(json: &str) -> Result<ExperimentFile> {
    let v: serde_json::Value = serde_json::from_str(json).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let echo = v
        .get("echo")
        .ok_or_else(|| Error::Schema("report has no `echo` section".into()))?;
    ExperimentFile::from_echo(echo)
}
