//! Event-by-event models: particle, wave, quantum and pilot wave.

use rand::Rng;

use super::{draw_poisson, light_quanta, CountMode, Emission, ModelKind, SimContext};
use crate::apparatus::{Arm, ArmGate, Detector};
use crate::detection::{Quadratic, WindowOutcome};

/// Where one photon can land and what it tells about its arm.
#[derive(Debug, Clone, Copy)]
struct Route {
    /// Probability of reaching the observation plane.
    weight: f64,
    /// Unit-integral landing density.
    density: Quadratic,
    /// `|p(R|event) − p(T|event)|` for events at this photon's landing.
    attribution: f64,
    tag: Option<Arm>,
}

fn route(ctx: &SimContext, arm: Option<Arm>, gate: ArmGate) -> Option<Route> {
    match ctx.model {
        ModelKind::Particle | ModelKind::PilotWave => {
            let arm = arm.expect("tagged models fix the arm at emission");
            if !gate.is_open(arm) {
                return None;
            }
            let density = if ctx.model == ModelKind::PilotWave && gate.both() {
                ctx.coherent_density()
            } else {
                SimContext::arm_density(arm)
            };
            Some(Route {
                weight: 1.0,
                density,
                attribution: 1.0,
                tag: Some(arm),
            })
        }
        ModelKind::Wave | ModelKind::QuantumComplementarity => {
            let wave = ctx.model == ModelKind::Wave;
            if gate.both() {
                let attribution = if wave {
                    0.0
                } else {
                    (ctx.reflectance - ctx.transmittance).abs()
                };
                return Some(Route {
                    weight: 1.0,
                    density: ctx.coherent_density(),
                    attribution,
                    tag: None,
                });
            }
            let open = [Arm::R, Arm::T].into_iter().find(|&a| gate.is_open(a))?;
            Some(Route {
                weight: ctx.arm_intensity(open),
                density: SimContext::arm_density(open),
                attribution: if wave { 0.0 } else { 1.0 },
                tag: None,
            })
        }
        ModelKind::LightQuanta => unreachable!("light quanta are resolved per window"),
    }
}

fn photon(
    ctx: &SimContext,
    arm: Option<Arm>,
    gate: ArmGate,
    mode: CountMode,
    rng: &mut impl Rng,
    out: &mut WindowOutcome,
) {
    let Some(r) = route(ctx, arm, gate) else {
        return;
    };
    let detected = r.weight >= 1.0 || rng.random::<f64>() < r.weight;
    if mode == CountMode::Exact {
        for d in Detector::ALL {
            if let Some(p) = ctx.pickup(d) {
                out.add_count(d, r.weight * r.density.apply(p).max(0.0), r.attribution);
            }
        }
        out.photons_detected += r.weight;
    }
    if !detected {
        return;
    }
    let x = ctx.sample_pattern(&r.density, rng);
    out.landings.push(x);
    if let Some(a) = r.tag {
        out.tags.record(a);
    }
    if mode == CountMode::Sampled {
        out.photons_detected += 1.0;
        if let Some(d) = ctx.layout.hit(x) {
            out.add_count(d, 1.0, r.attribution);
        }
    }
}

pub(super) fn detect_photons(
    ctx: &SimContext,
    emission: &Emission,
    gate: ArmGate,
    mode: CountMode,
    rng: &mut impl Rng,
) -> WindowOutcome {
    let mut out = WindowOutcome::default();
    match emission {
        Emission::Tagged(arms) => {
            for &arm in arms {
                photon(ctx, Some(arm), gate, mode, rng, &mut out);
            }
        }
        Emission::Untagged(n) => {
            for _ in 0..*n {
                photon(ctx, None, gate, mode, rng, &mut out);
            }
        }
        Emission::Quanta(_) => unreachable!("light quanta are resolved per window"),
    }
    out
}

/// Clicks of two whole-arm monitors behind the blocking device.
pub(super) fn monitor_window(
    ctx: &SimContext,
    emission: &Emission,
    gate: ArmGate,
    rng: &mut impl Rng,
) -> WindowOutcome {
    let mut out = WindowOutcome::default();
    let mut clicks = [0u64; 2];
    let slot = |a: Arm| match a {
        Arm::R => 0,
        Arm::T => 1,
    };
    match emission {
        Emission::Tagged(arms) => {
            for &arm in arms {
                if gate.is_open(arm) {
                    clicks[slot(arm)] += 1;
                    out.tags.record(arm);
                }
            }
        }
        Emission::Untagged(n) if ctx.model == ModelKind::Wave => {
            for arm in [Arm::R, Arm::T] {
                if gate.is_open(arm) {
                    clicks[slot(arm)] = draw_poisson(*n as f64 * ctx.arm_intensity(arm), rng);
                }
            }
        }
        Emission::Untagged(n) => {
            for _ in 0..*n {
                let arm = if rng.random::<f64>() < ctx.reflectance {
                    Arm::R
                } else {
                    Arm::T
                };
                if gate.is_open(arm) {
                    clicks[slot(arm)] += 1;
                }
            }
        }
        Emission::Quanta(quanta) => {
            let (a_r, a_t) = light_quanta::arm_sums(quanta, gate);
            clicks[0] = draw_poisson(a_r.norm_sqr(), rng);
            clicks[1] = draw_poisson(a_t.norm_sqr(), rng);
            out.quanta_emitted = quanta.len() as u64;
        }
    }
    let attribution = if ctx.model == ModelKind::Wave {
        0.0
    } else {
        1.0
    };
    out.add_count(Detector::P1, (clicks[0] > 0) as u8 as f64, attribution);
    out.add_count(Detector::P2, (clicks[1] > 0) as u8 as f64, attribution);
    out.photons_detected = (clicks[0] + clicks[1]) as f64;
    out
}

/// One detected (or absorbed) photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    /// Arm fixed at the beamsplitter, for models that have one.
    pub arm: Option<Arm>,
    /// `None` when the photon was absorbed by the blocking device.
    pub landing: Option<f64>,
    /// Fiber whose pickup window holds the landing position.
    pub detector: Option<Detector>,
    pub distinguishability: f64,
}

/// Simulate one photon of `ctx.model` under the configured static gate.
pub fn simulate_event(ctx: &SimContext, rng: &mut impl Rng) -> DetectionEvent {
    let gate = ctx.cfg.chopper.static_gate();
    let arm = ctx.model.tags_arm().then(|| {
        if rng.random::<f64>() < ctx.reflectance {
            Arm::R
        } else {
            Arm::T
        }
    });
    let absorbed = DetectionEvent {
        arm,
        landing: None,
        detector: None,
        distinguishability: 0.0,
    };
    let Some(r) = route(ctx, arm, gate) else {
        return absorbed;
    };
    if r.weight < 1.0 && rng.random::<f64>() >= r.weight {
        return absorbed;
    }
    let x = ctx.sample_pattern(&r.density, rng);
    DetectionEvent {
        arm,
        landing: Some(x),
        detector: ctx.layout.hit(x),
        distinguishability: r.attribution,
    }
}

fn expect_model(ctx: &SimContext, kind: ModelKind) {
    assert_eq!(ctx.model, kind, "context was built for another model");
}

/// Arm drawn from the reflectance, landing from that arm's envelope alone.
pub fn simulate_event_particle(ctx: &SimContext, rng: &mut impl Rng) -> DetectionEvent {
    expect_model(ctx, ModelKind::Particle);
    simulate_event(ctx, rng)
}

/// No arm; landing from the two-beam interference pattern.
pub fn simulate_event_wave(ctx: &SimContext, rng: &mut impl Rng) -> DetectionEvent {
    expect_model(ctx, ModelKind::Wave);
    simulate_event(ctx, rng)
}

/// Landing from the interference pattern with predictability `|R − T|`.
pub fn simulate_event_quantum(ctx: &SimContext, rng: &mut impl Rng) -> DetectionEvent {
    expect_model(ctx, ModelKind::QuantumComplementarity);
    simulate_event(ctx, rng)
}

/// Definite arm and a landing guided by the full interference pattern.
pub fn simulate_event_pilot_wave(ctx: &SimContext, rng: &mut impl Rng) -> DetectionEvent {
    expect_model(ctx, ModelKind::PilotWave);
    simulate_event(ctx, rng)
}
