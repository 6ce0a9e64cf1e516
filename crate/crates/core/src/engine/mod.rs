//! Seed-reproducible Monte Carlo runner.

mod delayed;
pub mod rng;
mod sweeps;
mod table_one;

use std::collections::VecDeque;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::apparatus::{ApparatusConfig, ArmGate, ChopperState, DetectorLayout};
use crate::detection::{
    complementarity, contrast_sigma, fringe_w, gra_alpha, p_counts, p_ledger, visibility_fit,
    DetectionSummary, FitBasis, Metrics,
};
use crate::error::{Error, Result};
use crate::models::{
    detect, emit, predict, CountMode, EmissionStream, ModelKind, Readout, SimContext, SourceKind,
    TableOnePrediction,
};

pub use delayed::{run_delayed_choice, DelayedChoiceComparison, MetricDifference};
pub use rng::{derive_seed, window_rng, Stage};
pub use sweeps::{sweep, sweep_flux, sweep_opd, SweepPoint, SweepVariable};
pub use table_one::{table_one, table_one_spec};

/// Windows handled by one work unit.
pub const CHUNK_WINDOWS: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RunMode {
    Standard,
    /// P1/P2 become whole-arm monitors and every window is a coincidence gate.
    ChopperCoincidence,
    /// Each window's configuration is committed `decision_delay` windows
    /// after its beamsplitter stage.
    DelayedChoice {
        decision_delay: u64,
    },
}

/// Change of the blocking device decided at a given window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChopperSwitch {
    /// Decisions committed at or after this window use `chopper`.
    pub at_window: u64,
    pub chopper: ChopperState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub model: ModelKind,
    pub cfg: ApparatusConfig,
    pub stream: EmissionStream,
    pub seed: u64,
    pub mode: RunMode,
    pub count_mode: CountMode,
    pub switch: Option<ChopperSwitch>,
}

impl RunSpec {
    /// Defaults for `model`: heralded single photons (or single quanta),
    /// 10⁵ windows, exact counts.
    pub fn new(model: ModelKind, seed: u64) -> Self {
        Self {
            model,
            cfg: ApparatusConfig::default(),
            stream: EmissionStream::default(),
            seed,
            mode: RunMode::Standard,
            count_mode: CountMode::Exact,
            switch: None,
        }
    }

    pub fn decision_delay(&self) -> u64 {
        match self.mode {
            RunMode::DelayedChoice { decision_delay } => decision_delay,
            _ => 0,
        }
    }

    fn readout(&self) -> Readout {
        match self.mode {
            RunMode::ChopperCoincidence => Readout::ArmMonitors,
            _ => Readout::Fibers(self.count_mode),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| Error::Validation {
            key: key.to_string(),
            message: message.to_string(),
        };
        if self.stream.n_windows == 0 {
            return Err(bad("windows", "at least one window is required"));
        }
        if let SourceKind::Poissonian { mean } = self.stream.source {
            if !(mean >= 0.0 && mean.is_finite()) {
                return Err(bad("mean_per_window", "must be finite and non-negative"));
            }
        }
        if self.stream.quanta_per_photon == 0 {
            return Err(bad("quanta_per_photon", "must be at least 1"));
        }
        self.cfg.validate()
    }

    /// Arm gate committed for `window` at decision time `commit`.
    fn gate(&self, window: u64, commit: u64) -> ArmGate {
        let state = match self.switch {
            Some(s) if commit >= s.at_window => s.chopper,
            _ => self.cfg.chopper,
        };
        state.gate_at(window as f64 * self.cfg.detection_window)
    }
}

/// Per-metric agreement with the model's expected row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conformance {
    pub p: Option<bool>,
    pub w: Option<bool>,
    pub inequality: Option<bool>,
    pub overall: bool,
}

/// Base tolerances; each widens to 3σ when the statistics are poorer.
pub const P_TOLERANCE: f64 = 0.02;
pub const W_ZERO_TOLERANCE: f64 = 0.05;
pub const W_ONE_TOLERANCE: f64 = 0.02;

/// Compare metrics with a prediction. Without fiber readout only P is
/// checked. With fiber readout but no which-way fibers, P and the
/// inequality are skipped.
pub fn conformance(
    pred: &TableOnePrediction,
    m: &Metrics,
    fibers: bool,
    which_way: bool,
) -> Conformance {
    let p = pred.expected_p.filter(|_| which_way || !fibers).map(|e| {
        match (m.p_ledger, m.p_ledger_sigma) {
            (Some(p), Some(s)) => (p - e).abs() <= P_TOLERANCE.max(3.0 * s),
            _ => false,
        }
    });
    let w = pred
        .expected_w
        .filter(|_| fibers)
        .map(|e| match (m.w, m.w_sigma) {
            (Some(w), Some(s)) if e == 0.0 => w <= W_ZERO_TOLERANCE.max(3.0 * s),
            (Some(w), Some(s)) => w >= e - W_ONE_TOLERANCE.max(3.0 * s),
            _ => false,
        });
    let inequality = pred
        .inequality
        .filter(|_| fibers && which_way)
        .map(|_| m.slack.is_some() && !m.complementarity_violation);
    let overall = [p, w, inequality].iter().all(|c| c.unwrap_or(true));
    Conformance {
        p,
        w,
        inequality,
        overall,
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub spec: RunSpec,
    pub layout: DetectorLayout,
    pub summary: DetectionSummary,
    /// Landing histogram, including the expected pattern of exact-mode
    /// light-quanta windows.
    pub histogram: Vec<f64>,
    pub metrics: Metrics,
    pub table_row: TableOnePrediction,
    pub conformance: Conformance,
    /// Photons detected minus quanta emitted; light-quanta model only.
    pub photon_balance: Option<f64>,
    /// Not part of any serialized output.
    pub wall_time: f64,
}

fn simulate_chunk(
    spec: &RunSpec,
    ctx: &SimContext,
    emission: &crate::models::EmissionContext,
    start: u64,
    end: u64,
) -> DetectionSummary {
    let delay = spec.decision_delay();
    let readout = spec.readout();
    let mut summary = DetectionSummary::empty(ctx.histogram);
    let mut in_flight = VecDeque::with_capacity(delay.min(CHUNK_WINDOWS) as usize + 1);
    for t in start..end + delay {
        if t < end {
            let mut rng = window_rng(spec.seed, t, Stage::Emission);
            in_flight.push_back(emit(emission, t, &mut rng));
        }
        if t >= start + delay {
            let window = in_flight.pop_front().expect("window in flight");
            assert!(
                t >= window.window_id + delay,
                "configuration committed before the decision delay elapsed"
            );
            let gate = spec.gate(window.window_id, t);
            let mut rng = window_rng(spec.seed, window.window_id, Stage::Detection);
            summary.record(&detect(ctx, &window, gate, readout, &mut rng));
        }
    }
    summary
}

/// Run with the global thread pool.
pub fn run(spec: &RunSpec) -> Result<RunResult> {
    spec.validate()?;
    let ctx = SimContext::new(spec.model, &spec.cfg)?;
    run_in(spec, &ctx)
}

/// Run on a dedicated pool of `workers` threads. The result does not depend
/// on `workers`.
pub fn run_with_workers(spec: &RunSpec, workers: usize) -> Result<RunResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run(spec))
}

/// Run against a prepared context, e.g. one whose fibers were placed for a
/// different configuration.
pub fn run_in(spec: &RunSpec, ctx: &SimContext) -> Result<RunResult> {
    spec.validate()?;
    let started = Instant::now();
    let emission = ctx.emission_context(spec.stream);
    let n = spec.stream.n_windows;
    let chunks = n.div_ceil(CHUNK_WINDOWS);
    let parts: Vec<DetectionSummary> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_WINDOWS;
            simulate_chunk(spec, ctx, &emission, start, (start + CHUNK_WINDOWS).min(n))
        })
        .collect();
    let summary = parts
        .iter()
        .fold(DetectionSummary::empty(ctx.histogram), |acc, p| {
            acc.merge(p)
        });

    let mut histogram = summary.histogram.clone();
    if !summary.expected.is_zero() {
        for (h, e) in histogram
            .iter_mut()
            .zip(ctx.expected_histogram(&summary.expected))
        {
            *h += e;
        }
    }
    let fibers = spec.mode != RunMode::ChopperCoincidence;
    let metrics = compute_metrics(ctx, &summary, &histogram, fibers);
    let table_row = predict(spec.model);
    let conformance = conformance(&table_row, &metrics, fibers, spec.cfg.which_way_fibers);
    let photon_balance = (spec.model == ModelKind::LightQuanta)
        .then_some(summary.photons_detected - summary.quanta_emitted as f64);
    Ok(RunResult {
        spec: spec.clone(),
        layout: ctx.layout,
        summary,
        histogram,
        metrics,
        table_row,
        conformance,
        photon_balance,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Every metric of a finished run.
pub fn compute_metrics(
    ctx: &SimContext,
    s: &DetectionSummary,
    histogram: &[f64],
    fibers: bool,
) -> Metrics {
    let p_ledger = p_ledger(s).ok();
    let p_ledger_sigma = p_ledger.map(|p| contrast_sigma(p, s.attribution_weight));
    let (w, visibility) = if fibers {
        let basis = FitBasis::new(&ctx.modes, ctx.histogram);
        (fringe_w(s).ok(), visibility_fit(histogram, &basis).ok())
    } else {
        (None, None)
    };
    let w_sigma = w.map(|w| contrast_sigma(w, s.counts.w1 + s.counts.w2));
    let slack = match (p_ledger, p_ledger_sigma, w, w_sigma) {
        (Some(p), Some(sp), Some(w), Some(sw)) => Some(complementarity(p, sp, w, sw)),
        _ => None,
    };
    Metrics {
        p_counts: p_counts(s).ok(),
        p_ledger,
        p_ledger_sigma,
        w,
        w_sigma,
        visibility_fit: visibility,
        alpha: (!fibers).then(|| gra_alpha(s).ok()).flatten(),
        slack: slack.map(|c| c.slack),
        slack_sigma: slack.map(|c| c.sigma),
        complementarity_violation: slack.is_some_and(|c| c.violated),
        w_click: w.map(|w| w > ctx.cfg.w_click_threshold),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: ModelKind) -> RunSpec {
        let mut spec = RunSpec::new(model, 11);
        spec.stream.n_windows = 3000;
        spec
    }

    #[test]
    fn chunked_runs_do_not_depend_on_workers() {
        let spec = small(ModelKind::Wave);
        let a = run_with_workers(&spec, 1).unwrap();
        let b = run_with_workers(&spec, 4).unwrap();
        assert_eq!(a.summary, b.summary);
        assert_eq!(a.metrics, b.metrics);
    }

    #[test]
    fn zero_delay_pipeline_equals_standard() {
        let spec = small(ModelKind::QuantumComplementarity);
        let mut delayed = spec.clone();
        delayed.mode = RunMode::DelayedChoice { decision_delay: 0 };
        assert_eq!(run(&spec).unwrap().summary, run(&delayed).unwrap().summary);
        delayed.mode = RunMode::DelayedChoice { decision_delay: 37 };
        assert_eq!(run(&spec).unwrap().summary, run(&delayed).unwrap().summary);
    }

    #[test]
    fn zero_windows_is_rejected() {
        let mut spec = small(ModelKind::Particle);
        spec.stream.n_windows = 0;
        assert!(matches!(run(&spec), Err(Error::Validation { .. })));
    }

    #[test]
    fn conformance_widens_with_sigma() {
        let pred = predict(ModelKind::Particle);
        let mut m = Metrics {
            p_counts: None,
            p_ledger: Some(1.0),
            p_ledger_sigma: Some(0.0),
            w: Some(0.1),
            w_sigma: Some(0.01),
            visibility_fit: None,
            alpha: None,
            slack: None,
            slack_sigma: None,
            complementarity_violation: false,
            w_click: None,
        };
        assert_eq!(conformance(&pred, &m, true, true).w, Some(false));
        m.w_sigma = Some(0.05);
        assert_eq!(conformance(&pred, &m, true, true).w, Some(true));
        assert!(conformance(&pred, &m, true, true).overall);
    }
}
