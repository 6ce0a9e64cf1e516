//! Geometry and optics of the interferometer: a Fresnel beamsplitter feeding
//! two arms that a concave mirror brings to a common focus at an angle, with
//! a delay line and a blocking device in the transmitted arm.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, golden_section_max, golden_section_min};
use crate::optics::{
    brewster_angle, fresnel, ledger_phase, Envelope, PhaseLedger, Polarization, TwoBeam,
};

/// Interferometer arm: reflected or transmitted at the beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    R,
    T,
}

/// Which arms reach the observation plane in a given window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArmGate {
    pub reflected: bool,
    pub transmitted: bool,
}

impl ArmGate {
    pub const OPEN: ArmGate = ArmGate {
        reflected: true,
        transmitted: true,
    };

    pub fn is_open(self, arm: Arm) -> bool {
        match arm {
            Arm::R => self.reflected,
            Arm::T => self.transmitted,
        }
    }

    pub fn both(self) -> bool {
        self.reflected && self.transmitted
    }
}

/// Blocking device in the separation plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChopperState {
    Open,
    BlockR,
    BlockT,
    /// Square-wave gating of arm T, 50% duty cycle, at `rate_hz`.
    Chopping {
        rate_hz: f64,
    },
}

impl ChopperState {
    /// Gate ignoring time dependence: a chopping wheel counts as open.
    pub fn static_gate(self) -> ArmGate {
        match self {
            ChopperState::Open | ChopperState::Chopping { .. } => ArmGate::OPEN,
            ChopperState::BlockR => ArmGate {
                reflected: false,
                transmitted: true,
            },
            ChopperState::BlockT => ArmGate {
                reflected: true,
                transmitted: false,
            },
        }
    }

    pub fn gate_at(self, t: f64) -> ArmGate {
        ArmGate {
            reflected: transmits(self, Arm::R, t),
            transmitted: transmits(self, Arm::T, t),
        }
    }
}

fn transmits(state: ChopperState, arm: Arm, t: f64) -> bool {
    match (state, arm) {
        (ChopperState::Open, _) => true,
        (ChopperState::BlockR, a) => a != Arm::R,
        (ChopperState::BlockT, a) => a != Arm::T,
        (ChopperState::Chopping { .. }, Arm::R) => true,
        (ChopperState::Chopping { rate_hz }, Arm::T) => (t * rate_hz).fract() < 0.5,
    }
}

/// Whether `arm` passes the blocking device at time `t` (seconds).
pub fn chopper_transmit(cfg: &ApparatusConfig, arm: Arm, t: f64) -> bool {
    transmits(cfg.chopper, arm, t)
}

/// Full parameterization of the setup, SI units throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct ApparatusConfig {
    pub wavelength: f64,
    pub glass_index: f64,
    pub incidence_angle: f64,
    pub polarization: Polarization,
    pub arm_path_r: f64,
    pub arm_path_t: f64,
    /// Signed extra path in arm T from the delay line.
    pub delay_opd: f64,
    /// Beam angles at focus.
    pub tilt_r: f64,
    pub tilt_t: f64,
    pub spot_center_r: f64,
    pub spot_center_t: f64,
    pub envelope_width: f64,
    pub envelope: Envelope,
    pub fiber_core_width: f64,
    pub chopper: ChopperState,
    pub coincidence_window: f64,
    /// Length of one emission window; hypothesis-5 summation runs over it.
    pub detection_window: f64,
    /// Phase added per reflection.
    pub reflection_phase: f64,
    /// Place P1/P2 on the two separated spots.
    pub which_way_fibers: bool,
    /// W counter clicks when W exceeds this.
    pub w_click_threshold: f64,
}

impl Default for ApparatusConfig {
    fn default() -> Self {
        crate::io::ApparatusSection::default()
            .to_config()
            .expect("default apparatus is valid")
    }
}

impl ApparatusConfig {
    /// Reflectance and transmittance of the beamsplitter interface.
    pub fn arm_intensities(&self) -> Result<(f64, f64)> {
        let f = fresnel(
            1.0,
            self.glass_index,
            self.incidence_angle,
            self.polarization,
        )?;
        Ok((f.reflectance, f.transmittance))
    }

    /// Phase ledgers of both arms up to the focal plane.
    ///
    /// Arm R: beamsplitter reflection, arm path, concave mirror.
    /// Arm T: beamsplitter transmission, arm path, tip-tilt mirror, the
    /// two-mirror delay line, concave mirror.
    pub fn arm_ledgers(&self) -> (PhaseLedger, PhaseLedger) {
        let r = PhaseLedger::new(self.reflection_phase)
            .reflect()
            .propagate(self.arm_path_r)
            .reflect();
        let t = PhaseLedger::new(self.reflection_phase)
            .transmit()
            .propagate(self.arm_path_t + self.delay_opd)
            .reflect()
            .reflect()
            .reflect()
            .reflect();
        (r, t)
    }

    pub fn arm_phases(&self) -> Result<(f64, f64)> {
        let (r, t) = self.arm_ledgers();
        Ok((
            ledger_phase(&r, self.wavelength)?,
            ledger_phase(&t, self.wavelength)?,
        ))
    }

    pub fn fringe_period(&self) -> f64 {
        self.wavelength / (self.tilt_r - self.tilt_t).abs()
    }

    pub fn spots_coincide(&self) -> bool {
        (self.spot_center_r - self.spot_center_t).abs() <= 1e-9 * self.envelope_width
    }

    /// Power of one arm's envelope at the other spot's center.
    pub fn spot_crosstalk(&self) -> f64 {
        let u = (self.spot_center_r - self.spot_center_t) / self.envelope_width;
        self.envelope.amplitude(u).powi(2)
    }

    /// Check the invariants; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| Error::Validation {
            key: key.to_string(),
            message,
        };
        let positive = [
            ("wavelength", self.wavelength),
            ("envelope_width", self.envelope_width),
            ("fiber_core_width", self.fiber_core_width),
            ("detection_window", self.detection_window),
            ("coincidence_window", self.coincidence_window),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(key, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.glass_index > 1.0 && self.glass_index.is_finite()) {
            return Err(bad(
                "glass_index",
                format!("must exceed 1, got {}", self.glass_index),
            ));
        }
        if !(self.incidence_angle > 0.0 && self.incidence_angle < FRAC_PI_2) {
            return Err(bad(
                "incidence_angle",
                format!("must lie in (0, 90°), got {} rad", self.incidence_angle),
            ));
        }
        for (key, v) in [
            ("tilt_r", self.tilt_r),
            ("tilt_t", self.tilt_t),
            ("spot_center_r", self.spot_center_r),
            ("spot_center_t", self.spot_center_t),
            ("delay_opd", self.delay_opd),
            ("reflection_phase", self.reflection_phase),
        ] {
            if !v.is_finite() {
                return Err(bad(key, format!("must be finite, got {v}")));
            }
        }
        if !(self.arm_path_r >= 0.0 && self.arm_path_r.is_finite()) {
            return Err(bad(
                "arm_path_r",
                format!("must be non-negative, got {}", self.arm_path_r),
            ));
        }
        if !(self.arm_path_t >= 0.0 && self.arm_path_t.is_finite()) {
            return Err(bad(
                "arm_path_t",
                format!("must be non-negative, got {}", self.arm_path_t),
            ));
        }
        if self.arm_path_t + self.delay_opd < 0.0 {
            return Err(bad(
                "delay_opd",
                "makes the transmitted arm's geometric path negative".to_string(),
            ));
        }
        if self.coincidence_window > self.detection_window {
            return Err(bad(
                "coincidence_window",
                "must not exceed the detection window".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&self.w_click_threshold) {
            return Err(bad(
                "w_click_threshold",
                format!("must lie in [0, 1], got {}", self.w_click_threshold),
            ));
        }
        if let ChopperState::Chopping { rate_hz } = self.chopper {
            if !(rate_hz > 0.0 && rate_hz.is_finite()) {
                return Err(bad(
                    "chopping_rate",
                    format!("must be positive, got {rate_hz}"),
                ));
            }
        }
        let period = self.fringe_period();
        if period.is_finite() && self.fiber_core_width >= period {
            return Err(bad(
                "fiber_core_width",
                format!(
                    "{:.3e} m straddles a full fringe (period {period:.3e} m)",
                    self.fiber_core_width
                ),
            ));
        }
        if self.which_way_fibers && !self.spots_coincide() && self.spot_crosstalk() >= 0.05 {
            return Err(bad(
                "spot_center_t",
                format!(
                    "spot cross-talk {:.3} must stay below 0.05 when which-way fibers are used",
                    self.spot_crosstalk()
                ),
            ));
        }
        Ok(())
    }
}

/// `(arm_path_T + delay) − arm_path_R`.
pub fn compute_opd(cfg: &ApparatusConfig) -> f64 {
    (cfg.arm_path_t + cfg.delay_opd) - cfg.arm_path_r
}

/// The four fiber heads in the observation plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorLayout {
    /// Which-way fibers; absent when not requested.
    pub x_p1: Option<f64>,
    pub x_p2: Option<f64>,
    /// Fringe maximum nearest the overlap center.
    pub x_w1: f64,
    /// Adjacent fringe minimum.
    pub x_w2: f64,
    pub fiber_width: f64,
}

/// Detector identifiers, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    P1,
    P2,
    W1,
    W2,
}

impl Detector {
    pub const ALL: [Detector; 4] = [Detector::P1, Detector::P2, Detector::W1, Detector::W2];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl DetectorLayout {
    /// Top-hat integration window of a fiber centered at `x_det`.
    pub fn pickup(&self, x_det: f64) -> (f64, f64) {
        (
            x_det - 0.5 * self.fiber_width,
            x_det + 0.5 * self.fiber_width,
        )
    }

    pub fn position(&self, d: Detector) -> Option<f64> {
        match d {
            Detector::P1 => self.x_p1,
            Detector::P2 => self.x_p2,
            Detector::W1 => Some(self.x_w1),
            Detector::W2 => Some(self.x_w2),
        }
    }

    /// Detector whose pickup window contains `x`, if any.
    pub fn hit(&self, x: f64) -> Option<Detector> {
        let half = 0.5 * self.fiber_width;
        Detector::ALL
            .into_iter()
            .find(|&d| self.position(d).is_some_and(|c| (x - c).abs() <= half))
    }
}

/// Locate the four fibers on the pattern formed with both arms open.
///
/// W1 sits on the fringe maximum nearest the midpoint between the spots and
/// W2 on the adjacent minimum whose pattern-without-interference value is
/// closest to W1's, so the envelope slope biases the pair as little as
/// possible. P1/P2 sit on the local maxima of the incoherent pattern next to
/// each spot center.
pub fn place_detectors(cfg: &ApparatusConfig) -> Result<DetectorLayout> {
    let model = TwoBeam::from_config(cfg, ArmGate::OPEN)?;
    let period = model.fringe_period();
    if !period.is_finite() {
        return Err(Error::Placement(
            "tilt difference is zero: no fringes to bracket".into(),
        ));
    }
    let tol = period * 1e-6;
    let coherent = |x: f64| model.coherent(x);
    let incoherent = |x: f64| model.incoherent(x);

    let mid = 0.5 * (cfg.spot_center_r + cfg.spot_center_t);
    let step = period / 64.0;
    let n = 256;
    let samples: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let x = mid - 2.0 * period + step * i as f64;
            (x, coherent(x))
        })
        .collect();
    let peak = (1..n)
        .filter(|&i| samples[i].1 >= samples[i - 1].1 && samples[i].1 > samples[i + 1].1)
        .min_by(|&a, &b| {
            (samples[a].0 - mid)
                .abs()
                .total_cmp(&(samples[b].0 - mid).abs())
        })
        .ok_or_else(|| Error::Placement("no fringe maximum near the overlap center".into()))?;
    let x_w1 = golden_section_max(
        coherent,
        samples[peak].0 - step,
        samples[peak].0 + step,
        tol,
    );

    let left = golden_section_min(coherent, x_w1 - period, x_w1, tol);
    let right = golden_section_min(coherent, x_w1, x_w1 + period, tol);
    let base = incoherent(x_w1);
    let x_w2 = if (incoherent(left) - base).abs() < (incoherent(right) - base).abs() - 1e-12 * base
    {
        left
    } else {
        right
    };
    if coherent(x_w2) >= coherent(x_w1) {
        return Err(Error::Placement(
            "fringe minimum is not below the maximum".into(),
        ));
    }

    let (x_p1, x_p2) = if cfg.which_way_fibers {
        if cfg.spots_coincide() {
            return Err(Error::Placement(
                "spots are perfectly superimposed: which-way fibers are undefined".into(),
            ));
        }
        let w = cfg.envelope_width;
        let find = |c: f64| golden_section_max(incoherent, c - 0.5 * w, c + 0.5 * w, w * 1e-9);
        (Some(find(cfg.spot_center_r)), Some(find(cfg.spot_center_t)))
    } else {
        (None, None)
    };

    Ok(DetectorLayout {
        x_p1,
        x_p2,
        x_w1,
        x_w2,
        fiber_width: cfg.fiber_core_width,
    })
}

/// Upper end of the incidence search.
pub const MAX_INCIDENCE: f64 = 89.9 * std::f64::consts::PI / 180.0;

/// Incidence angle at which the beamsplitter reflects `target` of the flux.
///
/// s-polarized reflectance rises monotonically from normal incidence; the
/// p-polarized search starts at the Brewster angle, where reflectance is zero.
pub fn incidence_for_reflectance(n1: f64, n2: f64, pol: Polarization, target: f64) -> Result<f64> {
    let lo = match pol {
        Polarization::S => 0.0,
        Polarization::P => brewster_angle(n1, n2),
    };
    let hi = MAX_INCIDENCE;
    let r = |i: f64| fresnel(n1, n2, i, pol).map(|f| f.reflectance);
    let (r_lo, r_hi) = (r(lo)?, r(hi)?);
    if !(r_lo <= target && target <= r_hi) {
        let max_reflectance = (0..=1000)
            .map(|k| r(lo + (hi - lo) * k as f64 / 1000.0).unwrap_or(0.0))
            .fold(r_hi, f64::max);
        return Err(Error::NoSolution {
            target,
            polarization: pol.as_str(),
            max_reflectance,
        });
    }
    Ok(bisect(
        |i| r(i).map(|v| v - target).unwrap_or(f64::NAN),
        lo,
        hi,
        1e-12,
    ))
}

/// Incidence angle equalizing both arms (reflectance 0.5).
pub fn calibrate_incidence(cfg: &ApparatusConfig) -> Result<f64> {
    if !(cfg.glass_index > 1.0) {
        return Err(Error::Domain(format!(
            "glass index must exceed 1, got {}",
            cfg.glass_index
        )));
    }
    incidence_for_reflectance(1.0, cfg.glass_index, cfg.polarization, 0.5)
}
