//! Phase bookkeeping along an optical path.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Something that happened to a light quantum on its way to the detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathEvent {
    Reflection,
    Transmission,
    ApertureDivision,
}

/// Geometric path and discrete events accumulated by one quantum.
///
/// Every reflection adds `reflection_phase` (π unless the convention is
/// swapped); transmissions and aperture divisions add nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseLedger {
    /// Geometric length travelled, meters.
    pub geometric_path: f64,
    pub reflection_count: u32,
    pub event_log: Vec<PathEvent>,
    /// Phase added per reflection, radians.
    pub reflection_phase: f64,
}

impl Default for PhaseLedger {
    fn default() -> Self {
        Self::new(PI)
    }
}

impl PhaseLedger {
    pub fn new(reflection_phase: f64) -> Self {
        Self {
            geometric_path: 0.0,
            reflection_count: 0,
            event_log: Vec::new(),
            reflection_phase,
        }
    }

    pub fn propagate(mut self, length: f64) -> Self {
        self.geometric_path += length;
        self
    }

    pub fn reflect(mut self) -> Self {
        self.reflection_count += 1;
        self.event_log.push(PathEvent::Reflection);
        self
    }

    pub fn transmit(mut self) -> Self {
        self.event_log.push(PathEvent::Transmission);
        self
    }

    pub fn divide(mut self) -> Self {
        self.event_log.push(PathEvent::ApertureDivision);
        self
    }
}

/// Total phase carried by `ledger` at `wavelength`, reduced to `[0, 2π)`.
///
/// The path is reduced modulo the wavelength before scaling; `fmod` is exact
/// so long arms do not lose the sub-wavelength part to rounding.
pub fn ledger_phase(ledger: &PhaseLedger, wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(Error::Domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    if !(ledger.geometric_path >= 0.0) {
        return Err(Error::Domain(format!(
            "geometric path must be non-negative, got {}",
            ledger.geometric_path
        )));
    }
    let cycles = (ledger.geometric_path % wavelength) / wavelength;
    let discrete = (ledger.reflection_phase * f64::from(ledger.reflection_count)) % TAU;
    let phase = (TAU * cycles + discrete).rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π
    Ok(if phase >= TAU { 0.0 } else { phase })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const LAMBDA: f64 = 633e-9;

    #[test]
    fn full_wave_is_identity() {
        let l = PhaseLedger::default().propagate(LAMBDA);
        assert_eq!(ledger_phase(&l, LAMBDA).unwrap(), 0.0);
    }

    #[test]
    fn single_reflection_is_pi() {
        let l = PhaseLedger::default().reflect();
        assert!((ledger_phase(&l, LAMBDA).unwrap() - PI).abs() < 1e-15);
    }

    #[test]
    fn two_reflections_cancel() {
        let l = PhaseLedger::default()
            .propagate(LAMBDA / 4.0)
            .reflect()
            .reflect();
        assert!((ledger_phase(&l, LAMBDA).unwrap() - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_wavelength() {
        let l = PhaseLedger::default();
        assert!(ledger_phase(&l, 0.0).is_err());
        assert!(ledger_phase(&l, -1.0).is_err());
    }

    #[test]
    fn log_tracks_events() {
        let l = PhaseLedger::default()
            .reflect()
            .transmit()
            .divide()
            .reflect();
        assert_eq!(l.reflection_count, 2);
        assert!(l.event_log.len() >= l.reflection_count as usize);
    }

    #[test]
    fn long_arm_keeps_sub_wavelength_phase() {
        let l = PhaseLedger::default().propagate(0.25 + LAMBDA / 2.0);
        let base = PhaseLedger::default().propagate(0.25);
        let d = ledger_phase(&l, LAMBDA).unwrap() - ledger_phase(&base, LAMBDA).unwrap();
        assert!((d.rem_euclid(TAU) - PI).abs() < 1e-9);
    }
}
