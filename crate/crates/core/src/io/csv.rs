//! CSV tables. Numbers use the shortest round-trip form; undefined values
//! are empty cells.

use std::fmt::Write;

use crate::engine::{RunResult, SweepPoint, SweepVariable};

fn num(x: f64) -> String {
    serde_json::Number::from_f64(x).map_or_else(String::new, |n| n.to_string())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

/// Column name and SI-to-file-unit factor of a swept variable.
pub fn sweep_column(var: SweepVariable) -> (&'static str, f64) {
    match var {
        SweepVariable::Opd => ("opd_nm", 1e9),
        SweepVariable::Flux => ("flux_mean", 1.0),
        SweepVariable::Tilt => ("tilt_mrad", 1e3),
        SweepVariable::Incidence => ("incidence_deg", 180.0 / std::f64::consts::PI),
    }
}

pub fn sweep_csv(var: SweepVariable, points: &[SweepPoint]) -> String {
    let (column, factor) = sweep_column(var);
    let mut out = format!(
        "{column},p_counts,p_ledger,w,visibility_fit,slack,n_p1,n_p2,n_w1,n_w2,intensity_w1\n"
    );
    for pt in points {
        let m = &pt.result.metrics;
        let c = &pt.result.summary.counts;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            num(pt.value * factor),
            opt(m.p_counts),
            opt(m.p_ledger),
            opt(m.w),
            opt(m.visibility_fit),
            opt(m.slack),
            num(c.p1),
            num(c.p2),
            num(c.w1),
            num(c.w2),
            num(pt.intensity_w1),
        )
        .unwrap();
    }
    out
}

/// Landing histogram with bin centers in micrometers.
pub fn histogram_csv(result: &RunResult) -> String {
    let spec = result.summary.histogram_spec;
    let mut out = String::from("x_um,counts\n");
    for (i, h) in result.histogram.iter().enumerate() {
        writeln!(out, "{},{}", num(spec.center(i) * 1e6), num(*h)).unwrap();
    }
    out
}

/// One row per model: expectation next to measurement.
pub fn table_one_csv(results: &[RunResult]) -> String {
    let mut out = String::from(
        "model,expected_p,p_ledger,expected_w,w,inequality,slack,p_counts,visibility_fit,conformant\n",
    );
    for r in results {
        let m = &r.metrics;
        let inequality = serde_json::to_value(r.table_row.inequality)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.spec.model.as_str(),
            opt(r.table_row.expected_p),
            opt(m.p_ledger),
            opt(r.table_row.expected_w),
            opt(m.w),
            inequality,
            opt(m.slack),
            opt(m.p_counts),
            opt(m.visibility_fit),
            r.conformance.overall,
        )
        .unwrap();
    }
    out
}
