//! Paired runs with the configuration decided before and after the
//! beamsplitter stage.

use serde::Serialize;

use super::{run, RunMode, RunResult, RunSpec};
use crate::detection::contrast_sigma;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricDifference {
    pub metric: &'static str,
    pub before: Option<f64>,
    pub after: Option<f64>,
    pub difference: Option<f64>,
    /// Combined 1σ of the two estimates.
    pub sigma: Option<f64>,
    pub within_two_sigma: bool,
}

#[derive(Debug, Clone)]
pub struct DelayedChoiceComparison {
    /// Decision committed in the same window as emission.
    pub before: RunResult,
    /// Decision committed `decision_delay` windows later.
    pub after: RunResult,
    pub differences: Vec<MetricDifference>,
}

fn sigmas(r: &RunResult) -> [(&'static str, Option<f64>, Option<f64>); 5] {
    let m = &r.metrics;
    let s = &r.summary;
    let hist_total: f64 = r.histogram.iter().sum();
    [
        (
            "p_counts",
            m.p_counts,
            m.p_counts
                .map(|p| contrast_sigma(p, s.counts.p1 + s.counts.p2)),
        ),
        ("p_ledger", m.p_ledger, m.p_ledger_sigma),
        ("w", m.w, m.w_sigma),
        (
            "visibility_fit",
            m.visibility_fit,
            m.visibility_fit.map(|v| contrast_sigma(v, hist_total)),
        ),
        ("slack", m.slack, m.slack_sigma),
    ]
}

/// Run `spec` (which must be in delayed-choice mode) next to the same run
/// with zero decision delay and report per-metric differences.
pub fn run_delayed_choice(spec: &RunSpec) -> Result<DelayedChoiceComparison> {
    if !matches!(spec.mode, RunMode::DelayedChoice { .. }) {
        return Err(Error::Config(
            "delayed-choice comparison needs mode delayed_choice".into(),
        ));
    }
    let mut immediate = spec.clone();
    immediate.mode = RunMode::DelayedChoice { decision_delay: 0 };
    let before = run(&immediate)?;
    let after = run(spec)?;
    let differences = sigmas(&before)
        .into_iter()
        .zip(sigmas(&after))
        .map(|((metric, b, sb), (_, a, sa))| {
            let difference = b.zip(a).map(|(b, a)| a - b);
            let sigma = sb.zip(sa).map(|(x, y)| x.hypot(y));
            let within_two_sigma = match (difference, sigma) {
                (Some(d), Some(s)) => d.abs() <= 2.0 * s,
                (None, _) => b.is_none() && a.is_none(),
                (Some(d), None) => d == 0.0,
            };
            MetricDifference {
                metric,
                before: b,
                after: a,
                difference,
                sigma,
                within_two_sigma,
            }
        })
        .collect();
    Ok(DelayedChoiceComparison {
        before,
        after,
        differences,
    })
}
