//! Which-way information, fringe visibility, anticorrelation and the
//! complementarity slack, all computed from a [`DetectionSummary`].

use serde::Serialize;

use super::summary::DetectionSummary;
use crate::error::{Error, Result};

fn undefined(metric: &'static str, reason: &str) -> Error {
    Error::UndefinedMetric {
        metric,
        reason: reason.to_string(),
    }
}

/// `|N_P1 − N_P2| / (N_P1 + N_P2)`.
pub fn p_counts(s: &DetectionSummary) -> Result<f64> {
    let total = s.counts.p1 + s.counts.p2;
    if total <= 0.0 {
        return Err(undefined("p_counts", "no counts at P1 or P2"));
    }
    Ok(((s.counts.p1 - s.counts.p2).abs() / total).min(1.0))
}

/// Mean distinguishability `|p(R|e) − p(T|e)|` over P-fiber events.
pub fn p_ledger(s: &DetectionSummary) -> Result<f64> {
    if s.attribution_weight <= 0.0 {
        return Err(undefined("p_ledger", "no P-fiber events carry attribution"));
    }
    Ok((s.attribution / s.attribution_weight).clamp(0.0, 1.0))
}

/// Both which-way readings: the literal count difference and the ledger one.
pub fn which_way_p(s: &DetectionSummary) -> (Result<f64>, Result<f64>) {
    (p_counts(s), p_ledger(s))
}

/// `|N_W1 − N_W2| / (N_W1 + N_W2)`.
pub fn fringe_w(s: &DetectionSummary) -> Result<f64> {
    let total = s.counts.w1 + s.counts.w2;
    if total <= 0.0 {
        return Err(undefined("w", "no counts at W1 or W2"));
    }
    Ok(((s.counts.w1 - s.counts.w2).abs() / total).min(1.0))
}

/// Grangier–Roger–Aspect anticorrelation parameter
/// `α = N_c · N_gates / (N_P1 · N_P2)`.
pub fn gra_alpha(s: &DetectionSummary) -> Result<f64> {
    if s.singles_gates == 0 {
        return Err(undefined("alpha", "no gates"));
    }
    if s.counts.p1 <= 0.0 || s.counts.p2 <= 0.0 {
        return Err(undefined("alpha", "zero singles at P1 or P2"));
    }
    Ok(s.coincidences_p1p2 as f64 * s.singles_gates as f64 / (s.counts.p1 * s.counts.p2))
}

/// Binomial standard error of a contrast-like metric `m ∈ [0,1]` estimated
/// from `n` counts: `sqrt((1 − m²)/n)`.
pub fn contrast_sigma(m: f64, n: f64) -> f64 {
    if n <= 0.0 {
        return f64::INFINITY;
    }
    ((1.0 - m * m).max(0.0) / n).sqrt()
}

/// Slack of `P² + W² ≤ 1` with its propagated uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Complementarity {
    pub slack: f64,
    pub sigma: f64,
    /// Set when the slack is more than 3σ below zero.
    pub violated: bool,
}

pub fn complementarity(p: f64, sigma_p: f64, w: f64, sigma_w: f64) -> Complementarity {
    let slack = 1.0 - p * p - w * w;
    let sigma = ((2.0 * p * sigma_p).powi(2) + (2.0 * w * sigma_w).powi(2)).sqrt();
    Complementarity {
        slack,
        sigma,
        violated: slack < -3.0 * sigma,
    }
}

/// Every derived metric of one run. Undefined values are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub p_counts: Option<f64>,
    pub p_ledger: Option<f64>,
    pub p_ledger_sigma: Option<f64>,
    pub w: Option<f64>,
    pub w_sigma: Option<f64>,
    pub visibility_fit: Option<f64>,
    pub alpha: Option<f64>,
    pub slack: Option<f64>,
    pub slack_sigma: Option<f64>,
    pub complementarity_violation: bool,
    pub w_click: Option<bool>,
}
