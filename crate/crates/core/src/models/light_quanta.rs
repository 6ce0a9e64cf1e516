//! Light quanta: each takes one arm, carries its ledger phase, and only
//! interferes with other quanta of the same window.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use super::{
    draw_poisson, CountMode, EmissionContext, EmissionStream, LightQuantumRecord, PhaseModel,
    SimContext,
};
use crate::apparatus::{Arm, ArmGate, Detector};
use crate::detection::{Pickup, Quadratic, WindowOutcome};

pub(super) fn emit_quanta(
    ctx: &EmissionContext,
    window_id: u64,
    rng: &mut impl Rng,
) -> Vec<LightQuantumRecord> {
    let n = ctx.stream.draw_count(ctx.stream.quanta_per_photon, rng);
    let piston = rng.random::<f64>() * TAU;
    (0..n)
        .map(|_| {
            let arm = ctx.draw_arm(rng);
            let phase = match ctx.stream.phase_model {
                PhaseModel::SharedPiston => piston,
                PhaseModel::Independent => rng.random::<f64>() * TAU,
            };
            LightQuantumRecord {
                window_id,
                arm,
                ledger: ctx.ledger(arm).clone(),
                amplitude: Complex64::from_polar(1.0, phase),
            }
        })
        .collect()
}

/// Coherent sums of the quanta arriving through each open arm.
pub(crate) fn arm_sums(quanta: &[LightQuantumRecord], gate: ArmGate) -> (Complex64, Complex64) {
    let mut a_r = Complex64::new(0.0, 0.0);
    let mut a_t = Complex64::new(0.0, 0.0);
    for q in quanta.iter().filter(|q| gate.is_open(q.arm)) {
        match q.arm {
            Arm::R => a_r += q.amplitude,
            Arm::T => a_t += q.amplitude,
        }
    }
    (a_r, a_t)
}

/// Photon-number pattern of a window: `|A_R u_R + A_T u_T|²`.
///
/// The ledger phases live in the arm modes, so quanta of one arm add with
/// their random phase factors only. A lone quantum gives `|u_arm|²` with no
/// cross term.
pub fn window_field(quanta: &[LightQuantumRecord], gate: ArmGate) -> Quadratic {
    let (a_r, a_t) = arm_sums(quanta, gate);
    Quadratic::of_field(a_r, a_t)
}

fn attribution(field: &Quadratic, p: &Pickup) -> f64 {
    let r = field.rr * p.rr;
    let t = field.tt * p.tt;
    if r + t > 0.0 {
        (r - t).abs() / (r + t)
    } else {
        0.0
    }
}

pub(super) fn detect_quanta(
    ctx: &SimContext,
    quanta: &[LightQuantumRecord],
    gate: ArmGate,
    mode: CountMode,
    rng: &mut impl Rng,
) -> WindowOutcome {
    let mut out = WindowOutcome {
        quanta_emitted: quanta.len() as u64,
        ..Default::default()
    };
    for q in quanta.iter().filter(|q| gate.is_open(q.arm)) {
        out.tags.record(q.arm);
    }
    let field = window_field(quanta, gate);
    if field.is_zero() {
        return out;
    }
    let total = field.apply(&ctx.whole_plane()).max(0.0);
    match mode {
        CountMode::Exact => {
            for d in Detector::ALL {
                if let Some(p) = ctx.pickup(d) {
                    out.add_count(d, field.apply(p).max(0.0), attribution(&field, p));
                }
            }
            out.expected = field;
            out.photons_detected = total;
        }
        CountMode::Sampled => {
            let n = draw_poisson(total, rng);
            for _ in 0..n {
                let x = ctx.sample_pattern(&field, rng);
                out.landings.push(x);
                if let Some(d) = ctx.layout.hit(x) {
                    let p = ctx.pickup(d).expect("hit fibers exist");
                    out.add_count(d, 1.0, attribution(&field, p));
                }
            }
            out.photons_detected = n as f64;
        }
    }
    out
}

/// Emit and detect one window of the light-quanta model in one call.
pub fn simulate_window_light_quanta(
    ctx: &SimContext,
    stream: EmissionStream,
    window_id: u64,
    gate: ArmGate,
    mode: CountMode,
    rng: &mut impl Rng,
) -> WindowOutcome {
    let emission = ctx.emission_context(stream);
    let quanta = emit_quanta(&emission, window_id, rng);
    detect_quanta(ctx, &quanta, gate, mode, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apparatus::ApparatusConfig;
    use crate::models::ModelKind;
    use std::sync::Arc;

    fn record(arm: Arm, phase: f64) -> LightQuantumRecord {
        LightQuantumRecord {
            window_id: 0,
            arm,
            ledger: Arc::new(Default::default()),
            amplitude: Complex64::from_polar(1.0, phase),
        }
    }

    #[test]
    fn two_quanta_same_arm_give_four_photons_at_peak() {
        let ctx = SimContext::new(ModelKind::LightQuanta, &ApparatusConfig::default()).unwrap();
        let one = window_field(&[record(Arm::R, 0.3)], ArmGate::OPEN);
        let two = window_field(&[record(Arm::R, 0.3), record(Arm::R, 0.3)], ArmGate::OPEN);
        let x = ctx.modes.reflected.center;
        let a2 = ctx.unit_mode(Arm::R, x).norm_sqr();
        assert!((ctx.pattern(&one, x) - a2).abs() < 1e-12 * a2);
        assert!((ctx.pattern(&two, x) - 4.0 * a2).abs() < 1e-12 * a2);
    }

    #[test]
    fn single_quantum_has_no_cross_term() {
        let ctx = SimContext::new(ModelKind::LightQuanta, &ApparatusConfig::default()).unwrap();
        let q = [record(Arm::T, 1.1)];
        let coherent = window_field(&q, ArmGate::OPEN);
        let p = ctx.pickup(Detector::W1).unwrap();
        // Direct |amp|² path: the arm's own overlap integral.
        assert_eq!(coherent.apply(p), q[0].amplitude.norm_sqr() * p.tt);
        assert_eq!((coherent.rt_re, coherent.rt_im), (0.0, 0.0));
    }

    #[test]
    fn blocked_quanta_are_absorbed() {
        let q = [record(Arm::R, 0.0), record(Arm::T, 0.0)];
        let gate = ArmGate {
            reflected: true,
            transmitted: false,
        };
        let f = window_field(&q, gate);
        assert_eq!((f.rr, f.tt), (1.0, 0.0));
    }
}
