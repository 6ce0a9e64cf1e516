//! The five models of light run through the same apparatus.
//!
//! A window is simulated in two steps. [`emit`] draws everything decided at
//! the beamsplitter and sees only an [`EmissionContext`], which has no access
//! to the blocking device. [`detect`] then resolves the window against the
//! arm gate committed for it.

mod context;
mod events;
mod light_quanta;

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::apparatus::Arm;
use crate::optics::{ComplexAmp, PhaseLedger};

pub use context::{EmissionContext, SimContext};
pub use events::{
    simulate_event, simulate_event_particle, simulate_event_pilot_wave, simulate_event_quantum,
    simulate_event_wave, DetectionEvent,
};
pub use light_quanta::{simulate_window_light_quanta, window_field};

use crate::apparatus::ArmGate;
use crate::detection::WindowOutcome;

/// Which picture of light is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Particle,
    LightQuanta,
    Wave,
    QuantumComplementarity,
    PilotWave,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Particle,
        ModelKind::LightQuanta,
        ModelKind::Wave,
        ModelKind::QuantumComplementarity,
        ModelKind::PilotWave,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Particle => "particle",
            ModelKind::LightQuanta => "light_quanta",
            ModelKind::Wave => "wave",
            ModelKind::QuantumComplementarity => "quantum_complementarity",
            ModelKind::PilotWave => "pilot_wave",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Whether events carry a definite arm fixed at the beamsplitter.
    pub fn tags_arm(self) -> bool {
        matches!(self, ModelKind::Particle | ModelKind::PilotWave)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Form of a bound on `P² + W²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityForm {
    /// `P² + W² < 1`
    Strict,
    /// `P² + W² ≤ 1`
    NonStrict,
}

/// Expected outcome of one model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableOnePrediction {
    pub expected_p: Option<f64>,
    pub expected_w: Option<f64>,
    pub inequality: Option<InequalityForm>,
}

/// The outcome each model predicts in the single-photon regime.
pub fn predict(kind: ModelKind) -> TableOnePrediction {
    let point = |p, w| TableOnePrediction {
        expected_p: Some(p),
        expected_w: Some(w),
        inequality: None,
    };
    match kind {
        ModelKind::Particle | ModelKind::LightQuanta => point(1.0, 0.0),
        ModelKind::Wave => point(0.0, 1.0),
        ModelKind::PilotWave => point(1.0, 1.0),
        ModelKind::QuantumComplementarity => TableOnePrediction {
            expected_p: None,
            expected_w: None,
            inequality: Some(InequalityForm::Strict),
        },
    }
}

/// Statistics of the number of emitted units per window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SourceKind {
    /// Exactly one photon per window.
    SinglePhotonHeralded,
    /// Poisson-distributed count with the given mean.
    Poissonian { mean: f64 },
}

/// Phase relation between the quanta of one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseModel {
    /// One random piston per window, common to all quanta.
    SharedPiston,
    /// An independent uniform phase for every quantum.
    Independent,
}

/// Whether detector counts are sampled clicks or exact expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    Sampled,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmissionStream {
    pub source: SourceKind,
    pub n_windows: u64,
    /// Quanta making up one heralded photon (light-quanta model only).
    pub quanta_per_photon: u32,
    pub phase_model: PhaseModel,
}

impl Default for EmissionStream {
    fn default() -> Self {
        Self {
            source: SourceKind::SinglePhotonHeralded,
            n_windows: 100_000,
            quanta_per_photon: 1,
            phase_model: PhaseModel::SharedPiston,
        }
    }
}

impl EmissionStream {
    /// Units emitted in one window: photons, or quanta for the light-quanta
    /// model.
    pub fn draw_count(&self, per_herald: u32, rng: &mut impl Rng) -> u32 {
        match self.source {
            SourceKind::SinglePhotonHeralded => per_herald,
            SourceKind::Poissonian { mean } => draw_poisson(mean, rng) as u32,
        }
    }
}

pub(crate) fn draw_poisson(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("finite positive mean")
        .sample(rng) as u64
}

/// One quantum in flight: a definite arm and the phase it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct LightQuantumRecord {
    pub window_id: u64,
    pub arm: Arm,
    pub ledger: Arc<PhaseLedger>,
    /// Random phase factor on top of the arm ledger; unit magnitude.
    pub amplitude: ComplexAmp,
}

/// What the beamsplitter produced in one window.
#[derive(Debug, Clone, PartialEq)]
pub enum Emission {
    /// Photons whose arm is fixed at emission.
    Tagged(Vec<Arm>),
    /// Photons with no definite arm.
    Untagged(u32),
    Quanta(Vec<LightQuantumRecord>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmittedWindow {
    pub window_id: u64,
    pub emission: Emission,
}

/// Draw everything decided at the beamsplitter for one window.
pub fn emit(ctx: &EmissionContext, window_id: u64, rng: &mut impl Rng) -> EmittedWindow {
    let emission = match ctx.model {
        ModelKind::Particle | ModelKind::PilotWave => {
            let n = ctx.stream.draw_count(1, rng);
            Emission::Tagged((0..n).map(|_| ctx.draw_arm(rng)).collect())
        }
        ModelKind::Wave | ModelKind::QuantumComplementarity => {
            Emission::Untagged(ctx.stream.draw_count(1, rng))
        }
        ModelKind::LightQuanta => Emission::Quanta(light_quanta::emit_quanta(ctx, window_id, rng)),
    };
    EmittedWindow {
        window_id,
        emission,
    }
}

/// How detector counts are formed for a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    /// Four fibers in the observation plane.
    Fibers(CountMode),
    /// P1 and P2 watch the whole of arm R and arm T; counts are clicks.
    ArmMonitors,
}

/// Resolve an emitted window against the committed arm gate.
pub fn detect(
    ctx: &SimContext,
    window: &EmittedWindow,
    gate: ArmGate,
    readout: Readout,
    rng: &mut impl Rng,
) -> WindowOutcome {
    match readout {
        Readout::ArmMonitors => events::monitor_window(ctx, &window.emission, gate, rng),
        Readout::Fibers(mode) => match &window.emission {
            Emission::Quanta(q) => light_quanta::detect_quanta(ctx, q, gate, mode, rng),
            other => events::detect_photons(ctx, other, gate, mode, rng),
        },
    }
}
